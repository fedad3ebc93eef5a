mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fracground::functionals::c_zero;
use fracground::solvers::{self, GroundStateReport, Method, MultiplierIdentities};
use fracground::verify::{self, Status};
use fracground::{spectral, Error, Exec, GridSpec, ProblemSpec, Variant};
use serde::Serialize;

use config::RunConfig;
use output::{ensure_dir, num, write_json, write_profile};

#[derive(Parser, Debug)]
#[command(
    name = "fracground",
    version,
    about = "Ground states of fractional double-power problems"
)]
struct Cli {
    /// Output directory (FRACGROUND_OUT takes precedence)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Execution mode for independent sub-tasks
    #[arg(long, global = true, value_enum, default_value_t = ExecArg::Parallel)]
    exec: ExecArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

impl From<ExecArg> for Exec {
    fn from(e: ExecArg) -> Exec {
        match e {
            ExecArg::Sequential => Exec::Sequential,
            ExecArg::Parallel => Exec::Parallel,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct GridArgs {
    /// Half length of the periodic domain [-L, L)
    #[arg(long = "L")]
    half_length: Option<f64>,
    /// Number of grid points
    #[arg(long = "N")]
    points: Option<usize>,
}

impl GridArgs {
    fn resolve(self, l: f64, n: usize) -> Result<GridSpec> {
        Ok(GridSpec::new(self.half_length.unwrap_or(l), self.points.unwrap_or(n))?)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one ground state from a JSON config
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sign classification of D u + c u = -u^p + u^q (sigma = 1)
    Classify {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1e-9)]
        grad_tol: f64,
    },
    /// Dump the resolvent kernel with its audit
    Kernel {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        nu: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Solve over a range of one parameter
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Concurrent rows; 0 uses every core
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Numerical audits
    Audit {
        #[command(subcommand)]
        kind: AuditKind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParam {
    C,
    Sigma,
    P,
    Q,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::C => "c",
            SweepParam::Sigma => "sigma",
            SweepParam::P => "p",
            SweepParam::Q => "q",
        }
    }

    fn apply(self, spec: &ProblemSpec, v: f64) -> fracground::Result<ProblemSpec> {
        let mut s = *spec;
        match self {
            SweepParam::C => s.c = v,
            SweepParam::Sigma => s.sigma = v,
            SweepParam::P => s.p = v,
            SweepParam::Q => s.q = v,
        }
        ProblemSpec::new(s.sigma, s.c, s.p, s.q, s.variant)
    }
}

#[derive(Subcommand, Debug)]
enum AuditKind {
    /// K4 lower bound on random fields and collapse of the residual iteration
    Sp4 {
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Positivity, parity, decay and mass of the kernel on the 3 x 3 (sigma, nu) grid
    Kernels {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Sign of min G_c on a c-grid around c0
    Threshold {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Level checks of a computed ground state against random Nehari trials
    Level {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rebuild a computed ground state through the positive resolvent
    Positivity {
        #[arg(long)]
        config: PathBuf,
    },
}

fn code(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run_solve(cfg: &RunConfig) -> fracground::Result<GroundStateReport> {
    match cfg.method {
        None => solvers::solve(&cfg.problem, cfg.grid, &cfg.solver),
        Some(Method::Nehari) => solvers::minimize_nehari(&cfg.problem, cfg.grid, &cfg.solver),
        Some(Method::Pohozaev) => solvers::minimize_pohozaev(&cfg.problem, cfg.grid, &cfg.solver),
        Some(Method::Petviashvili) => solvers::petviashvili(&cfg.problem, cfg.grid, &cfg.solver),
    }
}

fn explain(e: Error) -> anyhow::Error {
    match e {
        Error::Trivial => anyhow::anyhow!("{e}; see `fracground audit sp4` for the numerical check"),
        Error::Threshold { c, c0 } => {
            anyhow::anyhow!("c = {c} is not below the threshold c0 = {c0:.17}; the pohozaev minimization needs c < c0")
        }
        e => e.into(),
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    #[serde(flatten)]
    report: &'a GroundStateReport,
    identities: Option<MultiplierIdentities>,
    profile_csv: &'a str,
}

fn write_report(dir: &Path, report: &GroundStateReport) -> Result<()> {
    ensure_dir(dir)?;
    write_profile(&dir.join("profile.csv"), &report.profile)?;
    let out = SolveOutput {
        report,
        identities: solvers::multiplier_identities(report).ok(),
        profile_csv: "profile.csv",
    };
    write_json(&dir.join("report.json"), "report.v1", &out)
}

fn solve(path: &Path, dir: &Path) -> Result<ExitCode> {
    let cfg = config::load(path)?;
    let report = run_solve(&cfg).map_err(explain)?;
    write_report(dir, &report)?;
    println!(
        "{}: action {} el_residual {:.3e} converged {} -> {}",
        cfg.problem.variant,
        report.action,
        report.el_residual,
        report.converged,
        dir.display()
    );
    Ok(code(report.converged))
}

fn classify(p: u32, q: u32, c: f64, grid: GridSpec, grad_tol: f64, exec: Exec, dir: &Path) -> Result<ExitCode> {
    let cfg = solvers::SolverConfig {
        grad_tol,
        ..solvers::SolverConfig::default()
    };
    let report = verify::classify(p, q, c, grid, &cfg, exec)?;
    ensure_dir(dir)?;
    if let Some(r) = &report.positive_solution {
        write_profile(&dir.join("positive_profile.csv"), &r.profile)?;
    }
    if let Some(r) = &report.negative_solution {
        write_profile(&dir.join("negative_profile.csv"), &r.profile)?;
    }
    write_json(&dir.join("classification.json"), "classification.v1", &report)?;
    for v in &report.verdicts {
        println!("{:<30} {:?} margin {:e}", v.name, v.status, v.margin);
    }
    let ok = report.verdicts.iter().all(|v| v.status == Status::Passed)
        && report.positive_solution.as_ref().is_some_and(|r| r.converged);
    Ok(code(ok))
}

fn kernel(sigma: f64, nu: f64, grid: GridSpec, dir: &Path) -> Result<ExitCode> {
    let k = spectral::kernel(sigma, nu, grid)?;
    let audit = verify::kernel_audit(sigma, nu, grid)?;
    ensure_dir(dir)?;
    write_profile(&dir.join("kernel.csv"), &k)?;
    write_json(&dir.join("kernel.json"), "kernel.v1", &audit)?;
    println!(
        "quadrature {} (1/nu = {}) positive {} even {} decreasing {}",
        num(audit.quadrature),
        num(1.0 / nu),
        audit.positive,
        audit.even,
        audit.decreasing
    );
    Ok(code(audit.passed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum RowStatus {
    Converged,
    Unconverged,
    ThresholdBlocked,
    Invalid,
    Failed,
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    status: RowStatus,
    converged: bool,
    action: Option<f64>,
    nehari_value: Option<f64>,
    pohozaev: Option<f64>,
    message: Option<String>,
    report: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    param: &'static str,
    problem: &'a ProblemSpec,
    grid: &'a GridSpec,
    rows: Vec<SweepRow>,
}

fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        bail!("sweep needs finite bounds and at least one step");
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let d = (to - from) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { to } else { from + d * i as f64 })
        .collect())
}

fn sweep(
    path: &Path,
    param: SweepParam,
    range: (f64, f64, usize),
    jobs: usize,
    exec: Exec,
    dir: &Path,
) -> Result<ExitCode> {
    let cfg = config::load(path)?;
    let values = sweep_values(range.0, range.1, range.2)?;
    let results = exec.install(jobs, || {
        exec.map(
            values.clone(),
            |v| -> (f64, Result<GroundStateReport, (RowStatus, String)>) {
                let spec = match param.apply(&cfg.problem, v) {
                    Ok(s) => s,
                    Err(e) => return (v, Err((RowStatus::Invalid, e.to_string()))),
                };
                if spec.variant == Variant::Sp3 {
                    if let Ok(t) = c_zero(spec.p, spec.q) {
                        if spec.c >= t.c0 {
                            let msg = format!("c = {} >= c0 = {}; existence not decided", spec.c, t.c0);
                            return (v, Err((RowStatus::ThresholdBlocked, msg)));
                        }
                    }
                }
                let row_cfg = RunConfig {
                    problem: spec,
                    ..cfg.clone()
                };
                (v, run_solve(&row_cfg).map_err(|e| (RowStatus::Failed, e.to_string())))
            },
        )
    });
    ensure_dir(dir)?;
    let mut rows = Vec::new();
    let mut csv = format!("{},status,converged,S,K,pohozaev_residual\n", param.name());
    for (i, (v, res)) in results.into_iter().enumerate() {
        let row = match res {
            Ok(r) => {
                let name = format!("row_{i:03}");
                write_report(&dir.join(&name), &r)?;
                SweepRow {
                    value: v,
                    status: if r.converged {
                        RowStatus::Converged
                    } else {
                        RowStatus::Unconverged
                    },
                    converged: r.converged,
                    action: Some(r.action),
                    nehari_value: Some(r.nehari_value),
                    pohozaev: Some(r.pohozaev),
                    message: None,
                    report: Some(format!("{name}/report.json")),
                }
            }
            Err((status, msg)) => SweepRow {
                value: v,
                status,
                converged: false,
                action: None,
                nehari_value: None,
                pohozaev: None,
                message: Some(msg),
                report: None,
            },
        };
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        let status = serde_json::to_value(row.status)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            num(row.value),
            status.as_str().unwrap_or_default(),
            row.converged,
            opt(row.action),
            opt(row.nehari_value),
            opt(row.pohozaev)
        ));
        println!(
            "{} = {}: {}",
            param.name(),
            row.value,
            status.as_str().unwrap_or_default()
        );
        rows.push(row);
    }
    fs::write(dir.join("summary.csv"), csv).context("cannot write summary.csv")?;
    let any = rows.iter().any(|r| r.converged);
    let summary = SweepSummary {
        param: param.name(),
        problem: &cfg.problem,
        grid: &cfg.grid,
        rows,
    };
    write_json(&dir.join("summary.json"), "sweep.v1", &summary)?;
    Ok(code(any))
}

fn audit(kind: AuditKind, exec: Exec, dir: &Path) -> Result<ExitCode> {
    ensure_dir(dir)?;
    let target = dir.join("audit.json");
    let passed = match kind {
        AuditKind::Sp4 {
            sigma,
            c,
            p,
            q,
            trials,
            seed,
            grid,
        } => {
            let spec = ProblemSpec::new(sigma, c, p, q, Variant::Sp4)?;
            let a = verify::sp4_triviality_audit(&spec, grid.resolve(40.0, 4096)?, trials, seed, exec)?;
            write_json(&target, "audit_sp4.v1", &a)?;
            println!("min K4 / (min(1,c) |u|^2) = {}", num(a.min_ratio));
            a.passed
        }
        AuditKind::Kernels { grid } => {
            let a = verify::kernel_suite(grid.resolve(20.0, 1 << 14)?, exec)?;
            write_json(&target, "audit_kernels.v1", &KernelSuite { audits: &a })?;
            a.iter().all(|k| k.passed)
        }
        AuditKind::Threshold { p, q, points } => {
            let a = verify::threshold_sign_audit(p, q, points)?;
            write_json(&target, "audit_threshold.v1", &a)?;
            println!("c0 = {}", num(a.c0));
            a.passed
        }
        AuditKind::Level { config, trials, seed } => {
            let cfg = config::load(&config)?;
            let r = run_solve(&cfg).map_err(explain)?;
            let a = verify::ground_state_level_audit(&r, trials, seed, exec)?;
            write_json(&target, "audit_level.v1", &a)?;
            a.passed
        }
        AuditKind::Positivity { config } => {
            let cfg = config::load(&config)?;
            let r = run_solve(&cfg).map_err(explain)?;
            let a = verify::positivity_representation_check(&r.profile, &cfg.problem)?;
            write_json(&target, "audit_positivity.v1", &a)?;
            a.positive && a.reconstruction_error <= 10.0 * cfg.solver.grad_tol.max(r.el_residual)
        }
    };
    println!(
        "audit {} -> {}",
        if passed { "passed" } else { "failed" },
        target.display()
    );
    Ok(code(passed))
}

#[derive(Serialize)]
struct KernelSuite<'a> {
    audits: &'a [verify::KernelAudit],
}

fn run(cli: Cli) -> Result<ExitCode> {
    let exec = Exec::from(cli.exec);
    let out = cli.out.as_deref();
    match cli.command {
        Command::Solve { config } => solve(&config, &output::resolve_dir(out, "solve")),
        Command::Classify {
            p,
            q,
            c,
            grid,
            grad_tol,
        } => classify(
            p,
            q,
            c,
            grid.resolve(1600.0, 1 << 17)?,
            grad_tol,
            exec,
            &output::resolve_dir(out, "classify"),
        ),
        Command::Kernel { sigma, nu, grid } => kernel(
            sigma,
            nu,
            grid.resolve(20.0, 1 << 14)?,
            &output::resolve_dir(out, "kernel"),
        ),
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            jobs,
        } => sweep(
            &config,
            param,
            (from, to, steps),
            jobs,
            exec,
            &output::resolve_dir(out, "sweep"),
        ),
        Command::Audit { kind } => audit(kind, exec, &output::resolve_dir(out, "audit")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
