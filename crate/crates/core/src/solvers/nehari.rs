use crate::error::{Error, Result};
use crate::functionals::{Problem, ProblemSpec, Variant};
use crate::grid::{Field, GridSpec};

use super::newton::newton_polish;
use super::{l2, recenter, symmetrize_slice, GroundStateReport, Method, SolverConfig};

/// Positive lambda with K(lambda u) = 0.
///
/// K(lambda u) / lambda^2 = a - sum_i t_i lambda^{e_i - 1} where a is the
/// H_c norm and t_i the pairing of u with each power term.
pub fn nehari_scaling(spec: &ProblemSpec, u: &Field) -> Result<f64> {
    scaling_with(&Problem::new(*spec, *u.grid()), u.values())
}

pub(crate) fn scaling_with(problem: &Problem, u: &[f64]) -> Result<f64> {
    let spec = problem.spec();
    if spec.variant == Variant::Sp3 {
        return Err(Error::UnsupportedVariant {
            op: "nehari_scaling",
            variant: spec.variant,
        });
    }
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("nehari_scaling of the zero field".into()));
    }
    let parts = problem.parts_slice(u);
    let a = parts.kinetic + spec.c * parts.mass;
    let terms: Vec<(f64, f64)> = problem
        .terms()
        .iter()
        .zip(&parts.term_pairings)
        .map(|(t, &pair)| (pair, t.power - 1.0))
        .collect();
    ray_root(a, &terms)
}

/// First positive root of a - sum t_i l^{e_i}, given a > 0.
pub(crate) fn ray_root(a: f64, terms: &[(f64, f64)]) -> Result<f64> {
    if terms.iter().all(|&(t, _)| t <= 0.0) {
        return Err(Error::NoRoot("no focusing term along the ray".into()));
    }
    let h = |l: f64| a - terms.iter().map(|&(t, e)| t * l.powf(e)).sum::<f64>();
    let mut hi = 1.0;
    if h(hi) >= 0.0 {
        let mut k = 0;
        while h(hi) >= 0.0 {
            hi *= 2.0;
            k += 1;
            if k > 2000 || !hi.is_finite() {
                return Err(Error::NoRoot("sign change not bracketed".into()));
            }
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn project(problem: &Problem, u: &mut [f64]) -> Result<()> {
    let l = scaling_with(problem, u)?;
    u.iter_mut().for_each(|v| *v *= l);
    Ok(())
}

/// Preconditioned gradient descent on the Nehari set.
///
/// Each step moves along -(D^sigma + c)^{-1} S'(u) and rescales onto K = 0;
/// the step halves whenever the action would increase. With `polish` set the
/// descent stops at 1e-5 and Newton-Krylov finishes the solve.
pub fn minimize_nehari(spec: &ProblemSpec, grid: GridSpec, config: &SolverConfig) -> Result<GroundStateReport> {
    config.validate()?;
    match spec.variant {
        Variant::Sp4 => return Err(Error::Trivial),
        Variant::Sp3 => {
            return Err(Error::UnsupportedVariant {
                op: "minimize_nehari",
                variant: spec.variant,
            })
        }
        _ => {}
    }
    let problem = Problem::new(*spec, grid);
    let mut u = recenter(&config.initial_field(grid)?)?.into_values();
    symmetrize_slice(&mut u);
    project(&problem, &mut u)?;
    let mut action = problem.action_of(&problem.parts_slice(&u));
    let mut tau = config.step;
    let mut halvings = 0;
    let mut iterations = 0;
    let mut stalled = false;
    let mut reached = false;
    let descent_tol = if config.polish {
        config.grad_tol.max(1e-5)
    } else {
        config.grad_tol
    };
    while iterations < config.max_iter {
        let g = problem.gradient_slice(&u);
        if l2(&g) <= descent_tol * l2(&u) {
            reached = true;
            break;
        }
        let d = problem.precond().apply_slice(&g);
        loop {
            let mut trial: Vec<f64> = u.iter().zip(&d).map(|(x, y)| x - tau * y).collect();
            let ok = project(&problem, &mut trial).is_ok();
            if ok {
                let s = problem.action_of(&problem.parts_slice(&trial));
                if s <= action + 1e-14 * action.abs() {
                    u = trial;
                    action = s;
                    break;
                }
            }
            tau *= 0.5;
            halvings += 1;
            if tau < 1e-12 * config.step {
                stalled = true;
                break;
            }
        }
        iterations += 1;
        if stalled {
            break;
        }
        tau = (tau * 1.5).min(config.step);
        if config.recenter_every > 0 && iterations % config.recenter_every == 0 {
            let f = Field::new(grid, u)?;
            u = recenter(&f)?.into_values();
            symmetrize_slice(&mut u);
            project(&problem, &mut u)?;
            action = problem.action_of(&problem.parts_slice(&u));
        }
    }
    let mut polish_steps = 0;
    if config.polish && reached {
        polish_steps = newton_polish(&problem, &mut u, config.grad_tol, 40).steps;
    }
    symmetrize_slice(&mut u);
    project(&problem, &mut u)?;
    let profile = Field::new(grid, u)?;
    let mut report =
        GroundStateReport::assemble(&problem, profile, Method::Nehari, iterations, halvings, config.grad_tol);
    report.polish_steps = polish_steps;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(20.0, 256).unwrap()
    }

    #[test]
    fn golden_ratio_root() {
        // a = b = g = 1, p = 2, q = 3: 1 + l - l^2 = 0
        let root = ray_root(1.0, &[(-1.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!((root - 0.5 * (1.0 + 5f64.sqrt())).abs() < 1e-14);
        // root below one
        let root = ray_root(1.0, &[(4.0, 1.0)]).unwrap();
        assert!((root - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_and_homogeneity() {
        let spec = ProblemSpec::new(1.0, 1.0, 2.0, 3.0, Variant::Sp2).unwrap();
        let u = Field::from_fn(grid(), |x| 0.5 / (1.0 + x * x)).unwrap();
        let l = nehari_scaling(&spec, &u).unwrap();
        let on = u.scale(l);
        assert!((nehari_scaling(&spec, &on).unwrap() - 1.0).abs() < 1e-13);
        let l2 = nehari_scaling(&spec, &u.scale(2.0)).unwrap();
        assert!((2.0 * l2 - l).abs() < 1e-13 * l);
    }

    #[test]
    fn scaling_errors() {
        let sp4 = ProblemSpec::new(1.0, 1.0, 2.0, 3.0, Variant::Sp4).unwrap();
        let u = Field::from_fn(grid(), |x| (-x * x).exp()).unwrap();
        assert!(matches!(nehari_scaling(&sp4, &u), Err(Error::NoRoot(_))));
        let sp1 = ProblemSpec::new(1.0, 1.0, 2.0, 3.0, Variant::Sp1).unwrap();
        assert!(matches!(
            nehari_scaling(&sp1, &Field::zeros(grid())),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            minimize_nehari(&sp4, grid(), &SolverConfig::default()),
            Err(Error::Trivial)
        ));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn projection_lands_on_the_nehari_set(
            a in 0.01..20.0f64,
            w in 0.5..4.0f64,
            b in -1.0..1.0f64,
            sigma in 0.6..1.9f64,
            c in 0.1..3.0f64,
            v in 0usize..3,
        ) {
            let variant = [Variant::Sp1, Variant::Sp2, Variant::Single][v];
            let spec = ProblemSpec::new(sigma, c, 2.0, 3.0, variant).unwrap();
            let g = GridSpec::new(30.0, 512).unwrap();
            let u = Field::from_fn(g, |x| a * (-(x / w).powi(2)).exp() * (1.0 + b * x.sin())).unwrap();
            let problem = Problem::new(spec, g);
            let on = u.scale(nehari_scaling(&spec, &u).unwrap());
            let k = problem.nehari(&on).unwrap();
            prop_assert!(k.abs() <= 1e-10 * problem.hsc_norm_sq(&on).unwrap(), "K = {k}");
        }
    }
}
