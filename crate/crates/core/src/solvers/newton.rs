use crate::functionals::Problem;

use super::{gmres, l2, symmetrize_slice};

#[derive(Debug, Clone, Copy)]
pub(crate) struct PolishOutcome {
    pub steps: usize,
}

/// Newton iteration on S'(u) = 0 with right-preconditioned GMRES.
///
/// With M = (D^sigma + c)^{-1} the preconditioned Jacobian is v - f'(u) M v,
/// so each Krylov step costs one forward and one inverse transform.
pub(crate) fn newton_polish(problem: &Problem, u: &mut Vec<f64>, tol: f64, max_steps: usize) -> PolishOutcome {
    let el_of = |u: &[f64]| problem.el_residual_slice(u);
    symmetrize_slice(u);
    let mut el = el_of(u);
    let mut steps = 0;
    while el > tol && steps < max_steps {
        let g = problem.gradient_slice(u);
        let fp = problem.df_values(u);
        let b: Vec<f64> = g.iter().map(|v| -v).collect();
        let rtol = el.clamp(1e-12, 1e-3);
        let out = gmres(
            |v| {
                let mv = problem.precond().apply_slice(v);
                v.iter().zip(&mv).zip(&fp).map(|((v, m), d)| v - d * m).collect()
            },
            &b,
            rtol,
            50,
            20,
        );
        let delta = problem.precond().apply_slice(&out.x);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let mut trial: Vec<f64> = u.iter().zip(&delta).map(|(x, d)| x + t * d).collect();
            symmetrize_slice(&mut trial);
            let e = el_of(&trial);
            if e < el && l2(&trial) > 0.0 {
                *u = trial;
                el = e;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        steps += 1;
        if !accepted {
            break;
        }
    }
    PolishOutcome { steps }
}
