//! Minimization of J3 = sigma/2 ||D^{sigma/2}u||^2 on the Pohozaev constraint.
//!
//! The constrained minimizer v0 is usually far wider than the solution it
//! produces, so it is carried implicitly: the iterate u lives in the gauge of
//! the solution phi and v0(x) = u(x / alpha) for a scalar alpha. For sigma < 1
//! the descent minimizes the dilation invariant E(u) = J3(u) P(u)^{sigma-1};
//! for sigma = 1 it minimizes J3 on P = 0 with an amplitude projection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{c_zero, Problem, ProblemSpec, Variant};
use crate::grid::{Field, GridSpec};
use crate::spectral::{self, Symbol};

use super::newton::newton_polish;
use super::{l2, recenter, symmetrize_slice, GroundStateReport, Method, SolverConfig};

struct Branch<'a> {
    problem: &'a Problem,
    sigma: f64,
    c: f64,
    p: f64,
    q: f64,
}

struct State {
    kinetic: f64,
    mass: f64,
    /// P_c(u)
    constraint: f64,
    /// <P_c'(u), u>
    pairing: f64,
}

impl Branch<'_> {
    fn state(&self, u: &[f64]) -> State {
        let parts = self.problem.parts_slice(u);
        State {
            kinetic: parts.kinetic,
            mass: parts.mass,
            constraint: self.problem.pohozaev_p_of(&parts),
            pairing: -self.c * parts.mass + parts.term_pairings.iter().sum::<f64>(),
        }
    }

    fn j3(&self, s: &State) -> f64 {
        0.5 * self.sigma * s.kinetic
    }

    fn objective(&self, u: &[f64]) -> f64 {
        let s = self.state(u);
        if self.sigma < 1.0 {
            if s.constraint > 0.0 {
                self.j3(&s) * s.constraint.powf(self.sigma - 1.0)
            } else {
                f64::INFINITY
            }
        } else {
            self.j3(&s)
        }
    }

    /// Multiplier m in J3'(u) = m P'(u).
    fn multiplier(&self, u: &[f64]) -> f64 {
        let s = self.state(u);
        if self.sigma < 1.0 {
            (1.0 - self.sigma) * self.j3(&s) / s.constraint
        } else {
            2.0 * self.j3(&s) / s.pairing
        }
    }

    /// Smaller positive root of P(l u) = 0.
    fn amplitude_root(&self, u: &[f64]) -> Option<f64> {
        let parts = self.problem.parts_slice(u);
        let (p, q) = (self.p, self.q);
        let (bp, bq) = (parts.lp / (p + 1.0), parts.lq / (q + 1.0));
        let base = -0.5 * self.c * parts.mass;
        let h = |l: f64| base + l.powf(p - 1.0) * bp - l.powf(q - 1.0) * bq;
        let peak = ((p - 1.0) * bp / ((q - 1.0) * bq)).powf(1.0 / (q - p));
        if !(peak.is_finite() && h(peak) > 0.0) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, peak);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    fn project(&self, u: &mut [f64]) -> bool {
        if self.sigma < 1.0 {
            return true;
        }
        match self.amplitude_root(u) {
            Some(l) => {
                u.iter_mut().for_each(|v| *v *= l);
                true
            }
            None => false,
        }
    }

    /// Dilates u so that the multiplier becomes sigma.
    fn regauge(&self, u: &mut Vec<f64>) -> Result<()> {
        let m = self.multiplier(u);
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::Stationarity(m));
        }
        let t = (m / self.sigma).powf(1.0 / self.sigma);
        let grid = *self.problem.grid();
        let field = Field::from_parts(grid, std::mem::take(u));
        *u = spectral::dilate(&field, 1.0 / t)?.into_values();
        symmetrize_slice(u);
        if !self.project(u) {
            return Err(Error::NoRoot("constraint lost after dilation".into()));
        }
        Ok(())
    }

    /// Widest useful start: the configured profile, widened until P > 0 is
    /// reachable by scaling the amplitude.
    fn initial(&self, base: &Field) -> Result<Vec<f64>> {
        let peak = base.max_abs();
        for k in 0..12 {
            let shape = spectral::dilate(base, 0.5f64.powi(k))?;
            let parts = self.problem.parts_slice(shape.values());
            let (p, q) = (self.p, self.q);
            let constraint = |a: f64| {
                -0.5 * self.c * a * a * parts.mass + a.powf(p + 1.0) * parts.lp / (p + 1.0)
                    - a.powf(q + 1.0) * parts.lq / (q + 1.0)
            };
            let mut best: Option<(f64, f64)> = None;
            for i in 0..=240 {
                let a = 10f64.powf(-2.0 + i as f64 / 60.0) / peak;
                let p = constraint(a);
                if p > 0.0 && best.map_or(true, |(bp, _)| p > bp) {
                    best = Some((p, a));
                }
            }
            if let Some((_, a)) = best {
                let mut u: Vec<f64> = shape.values().iter().map(|x| a * x).collect();
                if self.project(&mut u) {
                    return Ok(u);
                }
            }
        }
        Err(Error::NoRoot("no initial profile with P_c > 0 was found".into()))
    }
}

/// Ground state of the sp3 problem through the Pohozaev-constrained minimizer.
pub fn minimize_pohozaev(spec: &ProblemSpec, grid: GridSpec, config: &SolverConfig) -> Result<GroundStateReport> {
    config.validate()?;
    if spec.variant != Variant::Sp3 {
        return Err(Error::UnsupportedVariant {
            op: "minimize_pohozaev",
            variant: spec.variant,
        });
    }
    let c0 = c_zero(spec.p, spec.q)?.c0;
    if spec.c >= c0 {
        return Err(Error::Threshold { c: spec.c, c0 });
    }
    let problem = Problem::new(*spec, grid);
    let sigma = spec.sigma;
    let branch = Branch {
        problem: &problem,
        sigma,
        c: spec.c,
        p: spec.p,
        q: spec.q,
    };
    let base = recenter(&config.initial_field(grid)?)?;
    let mut u = branch.initial(&base)?;
    symmetrize_slice(&mut u);
    branch.regauge(&mut u)?;
    branch.regauge(&mut u)?;

    let polish = config.polish && sigma < 1.0;
    let descent_tol = if polish {
        config.grad_tol.max(1e-5)
    } else {
        config.grad_tol
    };
    let d_sigma = problem.d_sigma();
    let mut tau = config.step;
    let mut halvings = 0;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let m = branch.multiplier(&u);
        let du = d_sigma.apply_slice(&u);
        let f = problem.f_values(&u);
        let g: Vec<f64> = du
            .iter()
            .zip(&u)
            .zip(&f)
            .map(|((d, x), f)| sigma * d - m * (-spec.c * x + f))
            .collect();
        if l2(&g) <= descent_tol * m * l2(&u) {
            break;
        }
        if (m / sigma - 1.0).abs() > 1e-2 {
            branch.regauge(&mut u)?;
            continue;
        }
        let dir = Symbol::inverse_affine(grid, sigma, sigma, m * spec.c).apply_slice(&g);
        let e0 = branch.objective(&u);
        let mut stalled = false;
        let next = loop {
            let mut trial: Vec<f64> = u.iter().zip(&dir).map(|(x, d)| x - tau * d).collect();
            if branch.project(&mut trial) {
                let e = branch.objective(&trial);
                if e <= e0 + 1e-14 * e0.abs() {
                    break trial;
                }
            }
            tau *= 0.5;
            halvings += 1;
            if tau < 1e-12 * config.step {
                stalled = true;
                break u.clone();
            }
        };
        u = next;
        if stalled {
            break;
        }
        tau = (tau * 1.5).min(config.step);
        if config.recenter_every > 0 && iterations % config.recenter_every == 0 {
            u = recenter(&Field::new(grid, u)?)?.into_values();
            symmetrize_slice(&mut u);
            branch.project(&mut u);
        }
    }
    branch.regauge(&mut u)?;
    let polish_steps = if polish {
        newton_polish(&problem, &mut u, config.grad_tol, 40).steps
    } else {
        0
    };

    let s = branch.state(&u);
    let alpha = if sigma < 1.0 { 1.0 / s.constraint } else { 1.0 / s.mass };
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Stationarity(s.constraint));
    }
    let j3 = alpha.powf(1.0 - sigma) * branch.j3(&s);
    let mu = alpha.powf(sigma) * s.pairing / s.kinetic;
    if !(mu > 0.0) {
        return Err(Error::Stationarity(mu));
    }
    let profile = Field::new(grid, u)?;
    let fraction = spectral::boundary_mass_fraction(&profile);
    if fraction > 1e-6 {
        return Err(Error::BoundaryMass { fraction });
    }
    let mut report = GroundStateReport::assemble(
        &problem,
        profile,
        Method::Pohozaev,
        iterations,
        halvings,
        config.grad_tol,
    );
    report.polish_steps = polish_steps;
    report.multiplier = Some(mu);
    report.j3_value = Some(j3);
    report.constraint_dilation = Some(alpha);
    Ok(report)
}

/// Relative defects of the two multiplier relations on a pohozaev report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiplierIdentities {
    /// mu (1-sigma)/sigma j3 - 1; undefined for sigma = 1.
    pub multiplier_level: Option<f64>,
    /// S3(phi) ((1-sigma)/sigma)^{-(1-sigma)/sigma} j3^{-1/sigma} - 1.
    pub action_level: f64,
}

pub fn multiplier_identities(report: &GroundStateReport) -> Result<MultiplierIdentities> {
    let (Some(mu), Some(j3)) = (report.multiplier, report.j3_value) else {
        return Err(Error::UnsupportedVariant {
            op: "multiplier_identities",
            variant: report.spec.variant,
        });
    };
    let sigma = report.spec.sigma;
    let k = (1.0 - sigma) / sigma;
    Ok(MultiplierIdentities {
        multiplier_level: (sigma < 1.0).then_some(mu * k * j3 - 1.0),
        action_level: report.action * k.powf(-k) * j3.powf(-1.0 / sigma) - 1.0,
    })
}
