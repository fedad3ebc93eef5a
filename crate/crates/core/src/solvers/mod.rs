//! Ground-state solvers.

mod gmres;
mod nehari;
mod newton;
mod petviashvili;
mod pohozaev;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{Problem, ProblemSpec, Variant};
use crate::grid::{Field, GridSpec};
use crate::spectral;

pub use gmres::{gmres, GmresOutcome};
pub use nehari::{minimize_nehari, nehari_scaling};
pub use petviashvili::petviashvili;
pub use pohozaev::{minimize_pohozaev, multiplier_identities, MultiplierIdentities};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    Gaussian,
    Lorentzian,
    Sech2,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Target for ||S'(u)||_2 / ||u||_2.
    pub grad_tol: f64,
    pub step: f64,
    /// Recenter and symmetrize every this many steps; 0 disables.
    pub recenter_every: usize,
    pub initial_profile: InitialProfile,
    pub init_amplitude: f64,
    pub init_width: f64,
    /// CSV read when `initial_profile` is `file`.
    pub init_file: Option<PathBuf>,
    /// Relative amplitude of seeded multiplicative noise on the initial guess.
    pub perturbation: f64,
    pub seed: u64,
    /// Newton-Krylov refinement after descent where the method allows it.
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 5000,
            grad_tol: 1e-9,
            step: 1.0,
            recenter_every: 50,
            initial_profile: InitialProfile::Lorentzian,
            init_amplitude: 1.0,
            init_width: 1.0,
            init_file: None,
            perturbation: 0.0,
            seed: 0,
            polish: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.grad_tol >= 1e-12) {
            return bad(format!("grad_tol must be at least 1e-12, got {}", self.grad_tol));
        }
        if !(self.step > 0.0) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.init_amplitude > 0.0 && self.init_width > 0.0) {
            return bad("initial amplitude and width must be positive".into());
        }
        if !(self.perturbation >= 0.0 && self.perturbation < 1.0) {
            return bad(format!("perturbation must lie in [0, 1), got {}", self.perturbation));
        }
        if self.initial_profile == InitialProfile::File && self.init_file.is_none() {
            return bad("initial_profile = file needs init_file".into());
        }
        Ok(())
    }

    pub fn initial_field(&self, grid: GridSpec) -> Result<Field> {
        let (a, w) = (self.init_amplitude, self.init_width);
        let base = match self.initial_profile {
            InitialProfile::Gaussian => Field::from_fn(grid, |x| a * (-(x / w).powi(2)).exp())?,
            InitialProfile::Lorentzian => Field::from_fn(grid, |x| a / (1.0 + (x / w).powi(2)))?,
            InitialProfile::Sech2 => Field::from_fn(grid, |x| a / (x / w).cosh().powi(2))?,
            InitialProfile::File => {
                let path = self.init_file.as_ref().expect("validated");
                let file = std::io::BufReader::new(std::fs::File::open(path)?);
                Field::read_csv(grid, file)?
            }
        };
        if self.perturbation == 0.0 {
            return Ok(base);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let eps = self.perturbation;
        let values = base
            .values()
            .iter()
            .map(|v| v * (1.0 + eps * rng.gen_range(-1.0..=1.0)))
            .collect();
        Field::new(grid, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nehari,
    Pohozaev,
    Petviashvili,
}

/// Profile plus every scalar diagnostic of a solve.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport {
    #[serde(skip)]
    pub profile: Field,
    pub spec: ProblemSpec,
    pub grid: GridSpec,
    pub method: Method,
    pub action: f64,
    pub nehari_value: f64,
    pub pohozaev: f64,
    pub el_residual: f64,
    pub multiplier: Option<f64>,
    pub j3_value: Option<f64>,
    /// Dilation taking the profile to the constrained minimizer v0(x) = phi(x / alpha).
    pub constraint_dilation: Option<f64>,
    pub d_estimate: f64,
    pub iterations: usize,
    pub step_halvings: usize,
    /// Newton steps taken after the descent.
    pub polish_steps: usize,
    pub converged: bool,
    pub kinetic: f64,
    pub mass: f64,
    pub hsc_norm_sq: f64,
    pub max_value: f64,
    pub min_value: f64,
    pub parity_defect: f64,
    pub boundary_mass_fraction: f64,
    pub spectral_tail_fraction: f64,
}

impl GroundStateReport {
    pub(crate) fn assemble(
        problem: &Problem,
        profile: Field,
        method: Method,
        iterations: usize,
        step_halvings: usize,
        grad_tol: f64,
    ) -> GroundStateReport {
        let parts = problem.parts_slice(profile.values());
        let spec = *problem.spec();
        let action = problem.action_of(&parts);
        let el_residual = problem.el_residual_slice(profile.values());
        let values = profile.values();
        GroundStateReport {
            spec,
            grid: *problem.grid(),
            method,
            action,
            nehari_value: problem.nehari_of(&parts),
            pohozaev: problem.pohozaev_residual_of(&parts),
            el_residual,
            multiplier: None,
            j3_value: None,
            constraint_dilation: None,
            d_estimate: action,
            iterations,
            step_halvings,
            polish_steps: 0,
            converged: el_residual <= grad_tol,
            kinetic: parts.kinetic,
            mass: parts.mass,
            hsc_norm_sq: parts.kinetic + spec.c * parts.mass,
            max_value: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_value: values.iter().copied().fold(f64::INFINITY, f64::min),
            parity_defect: profile.parity_defect(),
            boundary_mass_fraction: spectral::boundary_mass_fraction(&profile),
            spectral_tail_fraction: spectral::spectral_tail_fraction(&profile),
            profile,
        }
    }

    /// ||D^{sigma/2} phi||^2 + ||phi||^2, the scale used by the Pohozaev gate.
    pub fn pohozaev_scale(&self) -> f64 {
        self.kinetic + self.mass
    }
}

/// Circular shift placing argmax |u| at node N/2 (smallest index on ties).
pub fn recenter(u: &Field) -> Result<Field> {
    let v = u.values();
    let mut best = 0;
    for (m, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = m;
        }
    }
    if v[best] == 0.0 {
        return Err(Error::Domain("cannot recenter the zero field".into()));
    }
    let n = v.len();
    let shift = (n / 2 + n - best) % n;
    let mut out = vec![0.0; n];
    for (m, &x) in v.iter().enumerate() {
        out[(m + shift) % n] = x;
    }
    Ok(Field::from_parts(*u.grid(), out))
}

/// (u(x) + u(-x)) / 2.
pub fn symmetrize(u: &Field) -> Field {
    let r = u.reflect();
    u.combine(0.5, &r, 0.5).expect("same grid")
}

pub(crate) fn symmetrize_slice(u: &mut [f64]) {
    let n = u.len();
    for m in 1..n / 2 {
        let avg = 0.5 * (u[m] + u[n - m]);
        u[m] = avg;
        u[n - m] = avg;
    }
}

pub(crate) fn l2(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves with the method matching the variant.
pub fn solve(spec: &ProblemSpec, grid: GridSpec, config: &SolverConfig) -> Result<GroundStateReport> {
    match spec.variant {
        Variant::Sp3 => minimize_pohozaev(spec, grid, config),
        _ => minimize_nehari(spec, grid, config),
    }
}
