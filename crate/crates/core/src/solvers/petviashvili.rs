use crate::error::{Error, Result};
use crate::functionals::{Problem, ProblemSpec, Variant};
use crate::grid::{Field, GridSpec};
use crate::spectral::dot;

use super::{l2, symmetrize_slice, GroundStateReport, Method, SolverConfig};

/// Stabilized fixed-point iteration u <- M^gamma (D^sigma + c)^{-1} f(u) for a
/// single power, with gamma = p/(p-1) and M = <u,(D^sigma+c)u> / <u,f(u)>.
pub fn petviashvili(spec: &ProblemSpec, grid: GridSpec, config: &SolverConfig) -> Result<GroundStateReport> {
    config.validate()?;
    if spec.variant != Variant::Single {
        return Err(Error::UnsupportedVariant {
            op: "petviashvili",
            variant: spec.variant,
        });
    }
    let problem = Problem::new(*spec, grid);
    let h = grid.spacing();
    let gamma = spec.p / (spec.p - 1.0);
    let mut u = config.initial_field(grid)?.into_values();
    symmetrize_slice(&mut u);
    let mut iterations = 0;
    while iterations < config.max_iter {
        let parts = problem.parts_slice(&u);
        let lin = parts.kinetic + spec.c * parts.mass;
        let f = problem.f_values(&u);
        let m = lin / dot(h, &u, &f);
        if !(m.is_finite() && (1e-6..=1e6).contains(&m)) {
            return Err(Error::Divergence(format!(
                "stabilizing factor {m:e} at step {iterations}"
            )));
        }
        let mut next = problem.precond().apply_slice(&f);
        let s = m.powf(gamma);
        next.iter_mut().for_each(|v| *v *= s);
        symmetrize_slice(&mut next);
        let change: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let rel = l2(&change) / l2(&next);
        u = next;
        iterations += 1;
        if rel <= config.grad_tol && problem.el_residual_slice(&u) <= config.grad_tol {
            break;
        }
    }
    let profile = Field::new(grid, u)?;
    Ok(GroundStateReport::assemble(
        &problem,
        profile,
        Method::Petviashvili,
        iterations,
        0,
        config.grad_tol,
    ))
}
