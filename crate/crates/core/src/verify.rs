//! Audits built on top of the solvers: sign classification of the integer
//! power problem, triviality of sp4, the positivity representation, level
//! checks, the kernel suite and the threshold sign audit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{c_zero, g_c, Problem, ProblemSpec, Variant};
use crate::grid::{Field, GridSpec};
use crate::par::Exec;
use crate::solvers::{self, GroundStateReport, Method, SolverConfig};
use crate::spectral::{self, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    Indeterminate,
}

/// One named comparison, `margin` > 0 meaning the check holds with room.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl Verdict {
    fn new(name: &str, lhs: f64, rhs: f64, margin: f64, decided: bool) -> Verdict {
        let status = if !decided || !margin.is_finite() {
            Status::Indeterminate
        } else if margin > 0.0 {
            Status::Passed
        } else {
            Status::Failed
        };
        Verdict {
            name: name.to_string(),
            status,
            lhs,
            rhs,
            margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    OddOdd,
    OddEven,
    EvenOdd,
    EvenEven,
}

impl CaseLabel {
    pub fn of(p: u32, q: u32) -> CaseLabel {
        match (p % 2 == 1, q % 2 == 1) {
            (true, true) => CaseLabel::OddOdd,
            (true, false) => CaseLabel::OddEven,
            (false, true) => CaseLabel::EvenOdd,
            (false, false) => CaseLabel::EvenEven,
        }
    }

    /// Variant solved by phi > 0 when psi = -phi is a negative solution.
    pub fn negative_variant(self) -> Variant {
        match self {
            CaseLabel::OddOdd => Variant::Sp1,
            CaseLabel::OddEven => Variant::Sp4,
            CaseLabel::EvenOdd => Variant::Sp2,
            CaseLabel::EvenEven => Variant::Sp3,
        }
    }
}

/// How the negative solution was obtained, or why there is none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeBranch {
    /// -phi for the positive solution phi (odd nonlinearity).
    Mirrored,
    /// -phi for the sp2 ground state phi.
    FromSp2,
    /// -phi for the sp3 ground state phi.
    FromSp3,
    /// Negative solutions would solve sp4, which has none.
    Nonexistent,
    /// c >= c0: sp3 was not attempted and existence is not decided.
    Unknown,
    /// The sub-solve failed.
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub p: u32,
    pub q: u32,
    pub c: f64,
    pub case_label: CaseLabel,
    pub positive_solution: Option<GroundStateReport>,
    pub negative_solution: Option<GroundStateReport>,
    pub negative_branch: NegativeBranch,
    /// Error message of a failed negative sub-solve.
    pub negative_error: Option<String>,
    /// Least action among the computed signed solutions.
    pub d_estimate: f64,
    /// S1 at the sp1 ground state.
    pub d1_estimate: f64,
    /// Action of the computed positive solution.
    pub a_estimate: Option<f64>,
    pub verdicts: Vec<Verdict>,
}

/// Report for `profile` read as a solution of the integer power problem.
fn as_signed(
    spec: &ProblemSpec,
    grid: GridSpec,
    profile: Field,
    from: &GroundStateReport,
    grad_tol: f64,
) -> GroundStateReport {
    let problem = Problem::new(*spec, grid);
    let mut r = GroundStateReport::assemble(
        &problem,
        profile,
        from.method,
        from.iterations,
        from.step_halvings,
        grad_tol,
    );
    r.polish_steps = from.polish_steps;
    r
}

/// Sign classification for D u + c u = -u^p + u^q with sigma = 1.
///
/// Positive solutions solve sp1; psi = -phi is a negative solution exactly
/// when phi > 0 solves the variant picked by the parities of p and q.
pub fn classify(
    p: u32,
    q: u32,
    c: f64,
    grid: GridSpec,
    config: &SolverConfig,
    exec: Exec,
) -> Result<ClassificationReport> {
    if p < 2 || q <= p {
        return Err(Error::InvalidSpec(format!(
            "classify needs 2 <= p < q, got p = {p}, q = {q}"
        )));
    }
    let (pf, qf) = (f64::from(p), f64::from(q));
    let full = ProblemSpec::new(1.0, c, pf, qf, Variant::IntegerSp)?;
    let label = CaseLabel::of(p, q);
    let sp1 = ProblemSpec::new(1.0, c, pf, qf, Variant::Sp1)?;
    let neg_variant = label.negative_variant();
    let neg_spec = ProblemSpec::new(1.0, c, pf, qf, neg_variant)?;
    let below_threshold = c < c_zero(pf, qf)?.c0;

    let solve_negative = || -> Option<Result<GroundStateReport>> {
        match neg_variant {
            Variant::Sp2 => Some(solvers::minimize_nehari(&neg_spec, grid, config)),
            Variant::Sp3 if below_threshold => Some(solvers::minimize_pohozaev(&neg_spec, grid, config)),
            _ => None,
        }
    };
    let (pos, neg) = exec.join(|| solvers::minimize_nehari(&sp1, grid, config), solve_negative);
    let pos = pos?;
    let tol = config.grad_tol;
    let pos_ok = pos.converged;
    let positive = as_signed(&full, grid, pos.profile.clone(), &pos, tol);

    let mut verdicts = Vec::new();
    let full_problem = Problem::new(full, grid);
    let action_full = |u: &Field| full_problem.action_of(&full_problem.parts_slice(u.values()));
    let scale = pos.hsc_norm_sq;

    let mut negative_error = None;
    let (negative, branch) = match label {
        CaseLabel::OddOdd => {
            let r = as_signed(&full, grid, pos.profile.scale(-1.0), &pos, tol);
            (Some(r), NegativeBranch::Mirrored)
        }
        CaseLabel::OddEven => (None, NegativeBranch::Nonexistent),
        CaseLabel::EvenOdd | CaseLabel::EvenEven => match neg {
            Some(Ok(r)) => {
                let branch = if label == CaseLabel::EvenOdd {
                    NegativeBranch::FromSp2
                } else {
                    NegativeBranch::FromSp3
                };
                (Some(as_signed(&full, grid, r.profile.scale(-1.0), &r, tol)), branch)
            }
            Some(Err(e)) => {
                negative_error = Some(e.to_string());
                (None, NegativeBranch::Failed)
            }
            None => (None, NegativeBranch::Unknown),
        },
    };

    match label {
        CaseLabel::OddOdd => {
            let neg = negative.as_ref().expect("mirrored");
            let (a, b) = (positive.action, neg.action);
            let defect = (a - b).abs() / a.abs();
            verdicts.push(Verdict::new("signed_actions_equal", a, b, 1e-10 - defect, pos_ok));
            verdicts.push(Verdict::new(
                "negative_solves_problem",
                neg.el_residual,
                tol,
                tol - neg.el_residual,
                pos_ok,
            ));
        }
        CaseLabel::OddEven => {
            // a negative solution psi would give K4(-psi) = 0
            let sp4 = Problem::new(neg_spec, grid);
            let k4 = sp4.nehari_of(&sp4.parts_slice(pos.profile.values()));
            verdicts.push(Verdict::new("no_negative_solution", k4, 0.0, k4 / scale, true));
        }
        CaseLabel::EvenOdd => {
            let a = positive.action;
            let mirrored = action_full(&pos.profile.scale(-1.0));
            verdicts.push(Verdict::new(
                "positive_above_mirrored",
                a,
                mirrored,
                (a - mirrored) / scale,
                pos_ok,
            ));
            // psi1 = -l phi1 with l placing phi1 on the sp2 Nehari set; S2(l phi1) < S1(l phi1) <= S1(phi1)
            let sp2 = Problem::new(neg_spec, grid);
            let chain = solvers::nehari_scaling(&neg_spec, &pos.profile)
                .map(|l| sp2.action_of(&sp2.parts_slice(pos.profile.scale(l).values())))
                .ok();
            match (&negative, chain) {
                (Some(neg), Some(s_psi1)) => {
                    let decided = pos_ok && neg.converged;
                    let d = neg.action;
                    verdicts.push(Verdict::new(
                        "ground_level_below_projected",
                        d,
                        s_psi1,
                        (s_psi1 - d) / scale + 1e-10,
                        decided,
                    ));
                    verdicts.push(Verdict::new(
                        "projected_below_d1",
                        s_psi1,
                        pos.action,
                        (pos.action - s_psi1) / scale,
                        decided,
                    ));
                    verdicts.push(Verdict::new("negative_below_positive", d, a, (a - d) / scale, decided));
                }
                _ => verdicts.push(Verdict::new("negative_below_positive", f64::NAN, a, f64::NAN, false)),
            }
        }
        CaseLabel::EvenEven => {
            // both signed candidates are reported; no ground state is declared
            let decided = pos_ok && negative.as_ref().is_some_and(|n| n.converged);
            let d = negative.as_ref().map_or(f64::NAN, |n| n.action);
            let status = if decided { Status::Passed } else { Status::Indeterminate };
            verdicts.push(Verdict {
                name: "both_signs_computed".into(),
                status,
                lhs: d,
                rhs: positive.action,
                margin: positive.action - d,
            });
        }
    }

    let d_estimate = negative
        .as_ref()
        .map_or(positive.action, |n| n.action.min(positive.action));
    Ok(ClassificationReport {
        p,
        q,
        c,
        case_label: label,
        d1_estimate: pos.action,
        a_estimate: Some(positive.action),
        positive_solution: Some(positive),
        negative_solution: negative,
        negative_branch: branch,
        negative_error,
        d_estimate,
        verdicts,
    })
}

/// Seeded smooth field: a few Gaussian bumps near the center.
///
/// With `signed` the amplitudes take both signs.
pub fn random_smooth_field(grid: GridSpec, seed: u64, stream: u64, signed: bool) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let l = grid.half_length();
    let count = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let mut a = rng.gen_range(0.2..1.5);
            if signed && rng.gen_bool(0.5) {
                a = -a;
            }
            let x0 = rng.gen_range(-0.15 * l..0.15 * l);
            let w = rng.gen_range(0.04 * l..0.12 * l);
            (a, x0, w)
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(a, x0, w)| a * (-((x - x0) / w).powi(2)).exp())
            .sum()
    })
    .expect("finite")
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualIteration {
    pub initial_norm: f64,
    pub final_norm: f64,
    pub iterations: usize,
    pub collapsed: bool,
    pub diverged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sp4Audit {
    pub spec: ProblemSpec,
    pub trials: usize,
    /// Smallest K4(u) / (min(1,c) ||u||_{H_c}^2) over the trials.
    pub min_ratio: f64,
    pub bound_holds: bool,
    pub residual_iterations: Vec<ResidualIteration>,
    pub nontrivial_fixed_point: bool,
    pub passed: bool,
}

/// Damped preconditioned residual iteration u <- u - tau (D^sigma + c)^{-1} S4'(u).
fn residual_iteration(problem: &Problem, start: &Field, max_iter: usize) -> ResidualIteration {
    let mut u = start.values().to_vec();
    let initial = spectral::lp_norm(start, 2.0).expect("finite");
    let h = problem.grid().spacing();
    let norm = |u: &[f64]| (h * u.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let tau = 0.5;
    let mut iterations = 0;
    let mut diverged = false;
    while iterations < max_iter && norm(&u) > 1e-6 * initial {
        let g = problem.gradient_slice(&u);
        let d = problem.precond().apply_slice(&g);
        u.iter_mut().zip(&d).for_each(|(x, d)| *x -= tau * d);
        iterations += 1;
        if u.iter().any(|v| !v.is_finite()) {
            diverged = true;
            break;
        }
    }
    let final_norm = norm(&u);
    ResidualIteration {
        initial_norm: initial,
        final_norm,
        iterations,
        collapsed: !diverged && final_norm <= 1e-6 * initial,
        diverged,
    }
}

pub fn sp4_triviality_audit(
    spec: &ProblemSpec,
    grid: GridSpec,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<Sp4Audit> {
    if spec.variant != Variant::Sp4 {
        return Err(Error::UnsupportedVariant {
            op: "sp4_triviality_audit",
            variant: spec.variant,
        });
    }
    let problem = Problem::new(*spec, grid);
    let floor = spec.c.min(1.0);
    let ratios = exec.map_range(trials, |i| {
        let u = random_smooth_field(grid, seed, i as u64, true);
        let parts = problem.parts_slice(u.values());
        problem.nehari_of(&parts) / (floor * (parts.kinetic + spec.c * parts.mass))
    });
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let lorentz = Field::from_fn(grid, |x| 1.0 / (1.0 + x * x))?;
    let mut starts = vec![lorentz];
    starts.extend((0..4).map(|i| random_smooth_field(grid, seed ^ 0x5eed, i, true)));
    let residual_iterations = exec.map(starts, |s| residual_iteration(&problem, &s, 500));
    let nontrivial_fixed_point = residual_iterations.iter().any(|r| !r.collapsed && !r.diverged);
    let bound_holds = min_ratio >= 1.0;
    Ok(Sp4Audit {
        spec: *spec,
        trials,
        min_ratio,
        bound_holds,
        nontrivial_fixed_point,
        passed: bound_holds && !nontrivial_fixed_point,
        residual_iterations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub lambda1: f64,
    /// max |R - phi| / max |phi| for the reconstruction R
    pub reconstruction_error: f64,
    pub min_reconstruction: f64,
    pub positive: bool,
}

/// Rebuilds phi = (D^sigma + c + l)^{-1} ((l + f(phi)/phi) phi) with
/// l = 1 - min f(phi)/phi, whose right side is a positive kernel applied to a
/// nonnegative function.
pub fn positivity_representation_check(phi: &Field, spec: &ProblemSpec) -> Result<PositivityReport> {
    let peak = phi.max_abs();
    if peak == 0.0 {
        return Err(Error::Domain("positivity check needs a nontrivial profile".into()));
    }
    let terms = spec.terms();
    let weight: Vec<f64> = phi
        .values()
        .iter()
        .map(|&s| terms.iter().map(|t| t.coef * s.abs().powf(t.power - 1.0)).sum())
        .collect();
    let lambda1 = 1.0 - weight.iter().copied().fold(f64::INFINITY, f64::min);
    let rhs: Vec<f64> = weight
        .iter()
        .zip(phi.values())
        .map(|(w, v)| (lambda1 + w) * v)
        .collect();
    let rebuilt = Symbol::inverse_affine(*phi.grid(), spec.sigma, 1.0, spec.c + lambda1).apply_slice(&rhs);
    let err = rebuilt
        .iter()
        .zip(phi.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let min_reconstruction = rebuilt.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PositivityReport {
        lambda1,
        reconstruction_error: err / peak,
        min_reconstruction,
        positive: min_reconstruction > 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelAudit {
    pub action: f64,
    pub scale: f64,
    /// I1(phi); sp1 only
    pub i_one: Option<f64>,
    /// |S1(phi) - I1(phi)| / scale
    pub identity_defect: Option<f64>,
    pub trials: usize,
    pub min_trial_action: f64,
    /// Trials with S(w) < S(phi) - 1e-8 scale.
    pub trials_below: usize,
    pub perturbed_action: f64,
    /// Smallest I1(w) over fields with K1(w) < 0; sp1 only.
    pub min_i_one_outside: Option<f64>,
    pub passed: bool,
}

pub fn ground_state_level_audit(
    report: &GroundStateReport,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<LevelAudit> {
    let spec = report.spec;
    if !matches!(spec.variant, Variant::Sp1 | Variant::Sp2 | Variant::Single) {
        return Err(Error::UnsupportedVariant {
            op: "ground_state_level_audit",
            variant: spec.variant,
        });
    }
    if !report.converged {
        return Err(Error::Domain("level audit needs a converged report".into()));
    }
    let grid = report.grid;
    let problem = Problem::new(spec, grid);
    let phi = &report.profile;
    let parts = problem.parts_slice(phi.values());
    let action = problem.action_of(&parts);
    let scale = parts.kinetic + spec.c * parts.mass;
    let i_one_of = |p: &crate::functionals::Parts| {
        let (pp, qq) = (spec.p + 1.0, spec.q + 1.0);
        (0.5 - 1.0 / qq) * (p.kinetic + spec.c * p.mass) + (1.0 / pp - 1.0 / qq) * p.lp
    };
    let sp1 = spec.variant == Variant::Sp1;
    let i_one = sp1.then(|| i_one_of(&parts));

    let samples = exec.map_range(trials, |i| -> Result<(f64, f64)> {
        let w = random_smooth_field(grid, seed, i as u64, true);
        let l = solvers::nehari_scaling(&spec, &w)?;
        let on = w.scale(l);
        let s = problem.action_of(&problem.parts_slice(on.values()));
        // beyond the Nehari set K1 < 0
        let out = w.scale(1.5 * l);
        Ok((s, i_one_of(&problem.parts_slice(out.values()))))
    });
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let min_trial_action = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let trials_below = samples.iter().filter(|s| s.0 < action - 1e-8 * scale).count();
    let min_i_one_outside = sp1.then(|| samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min));

    let bump = random_smooth_field(grid, seed, u64::MAX, true);
    let eps = 1e-2 * phi.max_abs() / bump.max_abs();
    let perturbed = phi.combine(1.0, &bump, eps)?;
    let l = solvers::nehari_scaling(&spec, &perturbed)?;
    let perturbed_action = problem.action_of(&problem.parts_slice(perturbed.scale(l).values()));

    let identity_defect = i_one.map(|i| (action - i).abs() / scale);
    let passed = action > 0.0
        && trials_below == 0
        && perturbed_action > action
        && identity_defect.map_or(true, |d| d <= 1e-10)
        && min_i_one_outside.map_or(true, |m| m > action - 1e-8 * scale);
    Ok(LevelAudit {
        action,
        scale,
        i_one,
        identity_defect,
        trials,
        min_trial_action,
        trials_below,
        perturbed_action,
        min_i_one_outside,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelAudit {
    pub sigma: f64,
    pub nu: f64,
    pub grid: GridSpec,
    pub min_value: f64,
    pub parity_defect: f64,
    /// Largest increase between neighbours moving outward on |x| <= 0.9 L.
    pub max_increase: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
    pub positive: bool,
    pub even: bool,
    pub decreasing: bool,
    pub passed: bool,
}

pub fn kernel_audit(sigma: f64, nu: f64, grid: GridSpec) -> Result<KernelAudit> {
    let k = spectral::kernel(sigma, nu, grid)?;
    kernel_audit_of(&k, sigma, nu)
}

pub(crate) fn kernel_audit_of(k: &Field, sigma: f64, nu: f64) -> Result<KernelAudit> {
    let grid = *k.grid();
    let v = k.values();
    let n = v.len();
    let center = n / 2;
    let reach = (0.9 * grid.half_length() / grid.spacing()).floor() as usize;
    let reach = reach.min(center - 1);
    let mut max_increase = f64::NEG_INFINITY;
    for d in 0..reach {
        max_increase = max_increase.max(v[center + d + 1] - v[center + d]);
        max_increase = max_increase.max(v[center - d - 1] - v[center - d]);
    }
    let min_value = v.iter().copied().fold(f64::INFINITY, f64::min);
    let parity_defect = k.parity_defect();
    let quadrature = spectral::quadrature(k);
    let quadrature_error = (quadrature - 1.0 / nu).abs();
    let positive = min_value > 0.0;
    let even = parity_defect <= 1e-12 * k.max_abs();
    let decreasing = max_increase < 0.0;
    Ok(KernelAudit {
        sigma,
        nu,
        grid,
        min_value,
        parity_defect,
        max_increase,
        quadrature,
        quadrature_error,
        positive,
        even,
        decreasing,
        passed: positive && even && decreasing && quadrature_error <= 1e-6,
    })
}

pub const KERNEL_SIGMAS: [f64; 3] = [0.5, 1.0, 1.5];
pub const KERNEL_NUS: [f64; 3] = [0.5, 1.0, 2.0];

/// Kernel audit over the 3 x 3 grid of (sigma, nu).
pub fn kernel_suite(grid: GridSpec, exec: Exec) -> Result<Vec<KernelAudit>> {
    let pairs: Vec<(f64, f64)> = KERNEL_SIGMAS
        .iter()
        .flat_map(|&s| KERNEL_NUS.iter().map(move |&n| (s, n)))
        .collect();
    exec.map(pairs, |(s, n)| kernel_audit(s, n, grid)).into_iter().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub c: f64,
    pub min_g: f64,
    pub argmin: f64,
    /// |c - c0| <= 1e-6; no expectation is checked.
    pub excluded: bool,
    pub expect_negative: bool,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdAudit {
    pub p: f64,
    pub q: f64,
    pub c0: f64,
    pub c0_by_maximization: f64,
    pub rows: Vec<ThresholdRow>,
    pub passed: bool,
}

/// min over (0, s_max] of G_c by a dense scan refined with golden sections.
pub fn g_c_minimum(spec: &ProblemSpec, s_max: f64) -> (f64, f64) {
    let samples = 4000;
    let step = s_max / samples as f64;
    let mut best = (f64::INFINITY, s_max);
    for i in 1..=samples {
        let s = i as f64 * step;
        let g = g_c(spec, s);
        if g < best.0 {
            best = (g, s);
        }
    }
    let (mut a, mut b) = ((best.1 - step).max(0.0), (best.1 + step).min(s_max));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = b - r * (b - a);
        let x2 = a + r * (b - a);
        if g_c(spec, x1) < g_c(spec, x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let s = 0.5 * (a + b);
    let g = g_c(spec, s);
    if g < best.0 {
        (g, s)
    } else {
        best
    }
}

/// Sign of min G_c on `points` values of c spread over [c0/2, 3c0/2].
pub fn threshold_sign_audit(p: f64, q: f64, points: usize) -> Result<ThresholdAudit> {
    let c0 = c_zero(p, q)?.c0;
    let bracket = ((q + 1.0) / (p + 1.0)).powf(1.0 / (q - p));
    let s_max = 2.0 * bracket;
    let denom = points.saturating_sub(1).max(1) as f64;
    let rows: Vec<ThresholdRow> = (0..points)
        .map(|i| -> Result<ThresholdRow> {
            let c = c0 * (0.5 + i as f64 / denom);
            let spec = ProblemSpec::new(1.0, c, p, q, Variant::Sp3)?;
            let (min_g, argmin) = g_c_minimum(&spec, s_max);
            let excluded = (c - c0).abs() <= 1e-6;
            let expect_negative = c < c0;
            let agrees = excluded || if expect_negative { min_g < 0.0 } else { min_g >= -1e-10 };
            Ok(ThresholdRow {
                c,
                min_g,
                argmin,
                excluded,
                expect_negative,
                agrees,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ThresholdAudit {
        p,
        q,
        c0,
        c0_by_maximization: crate::functionals::c_zero_by_maximization(p, q),
        passed: rows.iter().all(|r| r.agrees),
        rows,
    })
}

/// Invariants of a converged solve as verdicts (indeterminate if unconverged).
pub fn report_invariants(report: &GroundStateReport) -> Vec<Verdict> {
    let scale = report.pohozaev_scale();
    let peak = report.max_value;
    let mut out = vec![
        Verdict::new(
            "pohozaev",
            report.pohozaev.abs() / scale,
            1e-5,
            1e-5 - report.pohozaev.abs() / scale,
            report.converged,
        ),
        Verdict::new("positive", report.min_value, 0.0, report.min_value, report.converged),
        Verdict::new(
            "even",
            report.parity_defect,
            1e-8 * peak,
            1e-8 * peak - report.parity_defect,
            report.converged,
        ),
    ];
    let shape = crate::rearrange::check_radial_shape(&report.profile, 1e-10 * peak);
    out.push(Verdict::new(
        "monotone",
        f64::from(u8::from(shape.is_ok())),
        1.0,
        if shape.is_ok() { 1.0 } else { -1.0 },
        report.converged,
    ));
    if report.method != Method::Pohozaev {
        let k = report.nehari_value.abs() / report.hsc_norm_sq;
        out.push(Verdict::new("nehari", k, 1e-8, 1e-8 - k, report.converged));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_labels_follow_parity() {
        assert_eq!(CaseLabel::of(3, 5), CaseLabel::OddOdd);
        assert_eq!(CaseLabel::of(3, 4), CaseLabel::OddEven);
        assert_eq!(CaseLabel::of(2, 3), CaseLabel::EvenOdd);
        assert_eq!(CaseLabel::of(2, 4), CaseLabel::EvenEven);
        assert_eq!(serde_json::to_string(&CaseLabel::EvenOdd).unwrap(), "\"even_odd\"");
    }

    #[test]
    fn verdict_status() {
        assert_eq!(Verdict::new("a", 1.0, 0.0, 1.0, true).status, Status::Passed);
        assert_eq!(Verdict::new("a", 1.0, 0.0, -1.0, true).status, Status::Failed);
        assert_eq!(Verdict::new("a", 1.0, 0.0, 1.0, false).status, Status::Indeterminate);
        assert_eq!(
            Verdict::new("a", 1.0, 0.0, f64::NAN, true).status,
            Status::Indeterminate
        );
    }

    #[test]
    fn random_fields_are_seeded() {
        let g = GridSpec::new(20.0, 256).unwrap();
        let a = random_smooth_field(g, 3, 1, true);
        assert_eq!(a, random_smooth_field(g, 3, 1, true));
        assert_ne!(a, random_smooth_field(g, 3, 2, true));
        assert!(random_smooth_field(g, 9, 0, false).values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn threshold_audit_straddles_c0() {
        let a = threshold_sign_audit(2.0, 3.0, 20).unwrap();
        assert!(a.passed);
        assert_eq!(a.rows.len(), 20);
        assert!(a.rows.iter().any(|r| r.expect_negative) && a.rows.iter().any(|r| !r.expect_negative));
        assert!((a.c0 - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn g_c_minimum_hand_value() {
        let spec = ProblemSpec::new(1.0, 0.1, 2.0, 3.0, Variant::Sp3).unwrap();
        assert!((g_c(&spec, 0.5) - (0.0125 - 1.0 / 24.0 + 1.0 / 64.0)).abs() < 1e-15);
        let (g, s) = g_c_minimum(&spec, 3.0);
        assert!(g <= g_c(&spec, 0.5));
        // G_c'(s) = c s - s^2 + s^3 vanishes at the minimizer
        let root = 0.5 * (1.0 + (1.0f64 - 0.4).sqrt());
        assert!((s - root).abs() < 1e-7);
    }

    #[test]
    fn small_kernel_audit() {
        let g = GridSpec::new(20.0, 1 << 12).unwrap();
        let a = kernel_audit(1.0, 1.0, g).unwrap();
        assert!(a.positive && a.even && a.decreasing, "{a:?}");
        assert!(a.quadrature_error < 1e-12);
    }

    #[test]
    fn benjamin_positivity_representation() {
        let g = GridSpec::new(400.0, 1 << 15).unwrap();
        let phi = Field::from_fn(g, |x| 2.0 / (1.0 + x * x)).unwrap();
        let spec = ProblemSpec::new(1.0, 1.0, 2.0, 0.0, Variant::Single).unwrap();
        let r = positivity_representation_check(&phi, &spec).unwrap();
        assert!(r.positive);
        assert!(r.reconstruction_error * 2.0 <= 1e-4, "{r:?}");
        assert!(positivity_representation_check(&Field::zeros(g), &spec).is_err());
    }

    #[test]
    fn sp4_audit_small() {
        let g = GridSpec::new(20.0, 512).unwrap();
        let spec = ProblemSpec::new(1.0, 0.5, 2.0, 3.0, Variant::Sp4).unwrap();
        let a = sp4_triviality_audit(&spec, g, 10, 1, Exec::Sequential).unwrap();
        assert!(a.passed, "{a:?}");
        let sp1 = ProblemSpec {
            variant: Variant::Sp1,
            ..spec
        };
        assert!(sp4_triviality_audit(&sp1, g, 1, 1, Exec::Sequential).is_err());
    }

    #[test]
    fn classify_rejects_bad_powers() {
        let g = GridSpec::new(20.0, 64).unwrap();
        let cfg = SolverConfig::default();
        assert!(classify(3, 3, 0.1, g, &cfg, Exec::Sequential).is_err());
        assert!(classify(1, 3, 0.1, g, &cfg, Exec::Sequential).is_err());
    }
}
