//! Batch front-end: parse a run configuration, build the problem, execute
//! hypothesis checks, the monotone iteration, the uniqueness certificate and
//! oracle comparisons, and emit machine-readable reports.
//!
//! Exit codes: 0 converged (extremal pair or unique solution), 1 config
//! parse/validation error, 2 hypothesis refutation or invalid lower/upper
//! solutions, 3 monotonicity (or extremality) violation, 4 iteration budget
//! exhausted, 5 oracle bound exceeded.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::grid::PeriodicGridFunction;
use crate::problems::{
    build_parabolic, build_scalar_delay, build_transport, fourier_reference, timestep_oracle,
    ParabolicRecipe, TransportRecipe,
};
use crate::solver::{
    self, DelayedProblem, HypothesisConstants, IterationReport, SolveStatus,
    UniquenessCertificate,
};

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "EVODELAY_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_REFUTED: i32 = 2;
pub const EXIT_MONOTONICITY: i32 = 3;
pub const EXIT_MAX_ITER: i32 = 4;
pub const EXIT_ORACLE_BOUND: i32 = 5;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    #[serde(rename = "parabolic_1d")]
    Parabolic1d,
    TransportPeriodic,
    ScalarDelay,
}

/// Affine reaction term `f(x, t, u, v) = constant + state u + delayed v +
/// sine sin(2 pi t / omega)`, applied componentwise.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineRhsConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub state: f64,
    #[serde(default)]
    pub delayed: f64,
    #[serde(default)]
    pub sine: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub delay: f64,
    /// Required for scalar and parabolic problems; the transport problem is
    /// doubly 2 pi-periodic and must omit it.
    pub period: Option<f64>,
    // scalar_delay
    pub a: Option<f64>,
    pub k: Option<f64>,
    pub c: Option<f64>,
    // parabolic_1d / transport_periodic
    pub spatial_nodes: Option<usize>,
    pub diffusion: Option<f64>,
    pub upper_amplitude: Option<f64>,
    pub speed: Option<f64>,
    pub upper_level: Option<f64>,
    pub rhs: Option<AffineRhsConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: usize,
    pub tolerance: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub c3: f64,
    #[serde(default)]
    pub l1: f64,
    #[serde(default)]
    pub l2: f64,
}

impl ConstantsConfig {
    fn to_constants(self) -> HypothesisConstants {
        HypothesisConstants {
            c: self.c,
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            l1: self.l1,
            l2: self.l2,
            normal: 1.0,
        }
    }
}

fn default_samples() -> usize {
    200
}

fn default_probes() -> usize {
    3
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default)]
    pub h1: bool,
    #[serde(default)]
    pub h3h4h5: bool,
    #[serde(default)]
    pub certificate: bool,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub extremality: bool,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            h1: false,
            h3h4h5: false,
            certificate: false,
            oracle: false,
            extremality: false,
            samples: default_samples(),
            seed: 0,
            probes: default_probes(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Fourier,
    Timestep,
}

fn default_periods() -> usize {
    50
}

fn default_substeps() -> usize {
    10
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub kind: OracleKind,
    pub bound: f64,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

fn default_levels() -> usize {
    3
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    pub oracle: Option<OracleConfig>,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| SolverError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.nodes < 2 {
            return Err(SolverError::Config("grid.nodes must be >= 2".into()));
        }
        if !(g.tolerance > 0.0) {
            return Err(SolverError::Config("grid.tolerance must be > 0".into()));
        }
        if g.max_iter < 1 {
            return Err(SolverError::Config("grid.max_iter must be >= 1".into()));
        }

        let p = &self.problem;
        let reject = |field: &str, set: bool| -> Result<()> {
            if set {
                return Err(SolverError::Config(format!(
                    "problem.{field} does not apply to this problem kind"
                )));
            }
            Ok(())
        };
        match p.kind {
            ProblemKind::ScalarDelay => {
                for (name, v) in [("a", p.a), ("k", p.k), ("c", p.c)] {
                    if v.is_none() {
                        return Err(SolverError::Config(format!(
                            "scalar_delay needs problem.{name}"
                        )));
                    }
                }
                if p.period.is_none() {
                    return Err(SolverError::Config("scalar_delay needs problem.period".into()));
                }
                reject("spatial_nodes", p.spatial_nodes.is_some())?;
                reject("diffusion", p.diffusion.is_some())?;
                reject("upper_amplitude", p.upper_amplitude.is_some())?;
                reject("speed", p.speed.is_some())?;
                reject("upper_level", p.upper_level.is_some())?;
                reject("rhs", p.rhs.is_some())?;
                // the scalar recipe fixes most hypothesis constants; insist
                // the config spells out the same values rather than silently
                // overriding them
                let k = p.k.unwrap();
                let c = &self.constants;
                if c.c != 0.0 || c.c2 != 0.0 || c.c3 != 0.0 || c.l1 != 0.0 || c.l2 != k {
                    return Err(SolverError::Config(format!(
                        "scalar_delay fixes constants c = c2 = c3 = l1 = 0 and l2 = k = {k}; \
                         set [constants] accordingly (c1 is free)"
                    )));
                }
            }
            ProblemKind::Parabolic1d => {
                if p.spatial_nodes.is_none() {
                    return Err(SolverError::Config(
                        "parabolic_1d needs problem.spatial_nodes".into(),
                    ));
                }
                if p.upper_amplitude.is_none() {
                    return Err(SolverError::Config(
                        "parabolic_1d needs problem.upper_amplitude".into(),
                    ));
                }
                if p.period.is_none() {
                    return Err(SolverError::Config("parabolic_1d needs problem.period".into()));
                }
                if p.rhs.is_none() {
                    return Err(SolverError::Config("parabolic_1d needs [problem.rhs]".into()));
                }
                reject("a", p.a.is_some())?;
                reject("k", p.k.is_some())?;
                reject("c", p.c.is_some())?;
                reject("speed", p.speed.is_some())?;
                reject("upper_level", p.upper_level.is_some())?;
            }
            ProblemKind::TransportPeriodic => {
                if p.spatial_nodes.is_none() {
                    return Err(SolverError::Config(
                        "transport_periodic needs problem.spatial_nodes".into(),
                    ));
                }
                if p.upper_level.is_none() {
                    return Err(SolverError::Config(
                        "transport_periodic needs problem.upper_level".into(),
                    ));
                }
                if p.rhs.is_none() {
                    return Err(SolverError::Config(
                        "transport_periodic needs [problem.rhs]".into(),
                    ));
                }
                if p.period.is_some() {
                    return Err(SolverError::Config(
                        "transport_periodic is doubly 2 pi-periodic; omit problem.period".into(),
                    ));
                }
                reject("a", p.a.is_some())?;
                reject("k", p.k.is_some())?;
                reject("c", p.c.is_some())?;
                reject("diffusion", p.diffusion.is_some())?;
                reject("upper_amplitude", p.upper_amplitude.is_some())?;
            }
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        match self.problem.kind {
            ProblemKind::TransportPeriodic => std::f64::consts::TAU,
            _ => self.problem.period.unwrap_or(std::f64::consts::TAU),
        }
    }

    /// Output directory, honoring the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => self.output.directory.clone(),
        }
    }

    /// Build the configured problem on `nodes` time-grid nodes.
    pub fn build_problem_with_nodes(&self, nodes: usize) -> Result<DelayedProblem> {
        let p = &self.problem;
        match p.kind {
            ProblemKind::ScalarDelay => build_scalar_delay(
                p.a.unwrap(),
                p.k.unwrap(),
                p.c.unwrap(),
                p.delay,
                p.period.unwrap(),
                nodes,
                self.constants.c1,
            ),
            ProblemKind::Parabolic1d => {
                let recipe = ParabolicRecipe {
                    spatial_nodes: p.spatial_nodes.unwrap(),
                    time_nodes: nodes,
                    period: p.period.unwrap(),
                    delay: p.delay,
                    diffusion: p.diffusion.unwrap_or(1.0),
                    upper_amplitude: p.upper_amplitude.unwrap(),
                    constants: self.constants.to_constants(),
                };
                let rhs = affine_rhs(p.rhs.unwrap(), recipe.period);
                build_parabolic(&recipe, rhs)
            }
            ProblemKind::TransportPeriodic => {
                let recipe = TransportRecipe {
                    spatial_nodes: p.spatial_nodes.unwrap(),
                    time_nodes: nodes,
                    delay: p.delay,
                    speed: p.speed.unwrap_or(1.0),
                    upper_level: p.upper_level.unwrap(),
                    constants: self.constants.to_constants(),
                };
                let rhs = affine_rhs(p.rhs.unwrap(), std::f64::consts::TAU);
                build_transport(&recipe, rhs)
            }
        }
    }

    pub fn build_problem(&self) -> Result<DelayedProblem> {
        self.build_problem_with_nodes(self.grid.nodes)
    }
}

fn affine_rhs(cfg: AffineRhsConfig, period: f64) -> crate::problems::ScalarRhs {
    let freq = std::f64::consts::TAU / period;
    Box::new(move |_x, t, u, v| {
        cfg.constant + cfg.state * u + cfg.delayed * v + cfg.sine * (freq * t).sin()
    })
}

/// 17-significant-digit decimal formatting, fixed across platforms given the
/// deterministic arithmetic order of the single-threaded orchestration.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize)]
struct ChecksReport {
    h1: Option<solver::HypothesisCheck>,
    refined: Option<solver::RefinedChecks>,
}

#[derive(Debug, Serialize)]
struct OracleSummary {
    kind: String,
    bound: f64,
    max_error: f64,
    within_bound: bool,
}

#[derive(Debug, Serialize)]
struct RunReport {
    status: String,
    exit_code: i32,
    iterations: usize,
    final_gap: Option<f64>,
    fixed_point_residuals: Option<(f64, f64)>,
    mild_residuals: Option<(f64, f64)>,
    worst_monotone_slack: Option<f64>,
    checks: ChecksReport,
    certificate: Option<UniquenessCertificate>,
    violation: Option<solver::MonotonicityDiagnostics>,
    extremality_ok: Option<bool>,
    oracle: Option<OracleSummary>,
}

fn write_iterates_csv(dir: &Path, report: &IterationReport) -> Result<()> {
    let mut out = String::from("step,node,time,component,lower,upper\n");
    for (step, (v, w)) in report
        .lower_iterates
        .iter()
        .zip(&report.upper_iterates)
        .enumerate()
    {
        for j in 0..v.nodes() {
            let t = v.node_time(j);
            for i in 0..v.dim() {
                out.push_str(&format!(
                    "{step},{j},{},{i},{},{}\n",
                    fmt(t),
                    fmt(v.value(j as i64)[i]),
                    fmt(w.value(j as i64)[i]),
                ));
            }
        }
    }
    fs::write(dir.join("iterates.csv"), out)?;
    Ok(())
}

fn write_convergence_csv(
    dir: &Path,
    report: &IterationReport,
    kappa: Option<f64>,
) -> Result<()> {
    let kappa_txt = kappa.map(fmt).unwrap_or_else(|| "nan".into());
    let mut out = String::from("step,gap,lower_step,upper_step,ratio,kappa\n");
    out.push_str(&format!("0,{},,,,{kappa_txt}\n", fmt(report.gaps[0])));
    for i in 0..report.step_sizes.len() {
        let (ls, us) = report.step_sizes[i];
        out.push_str(&format!(
            "{},{},{},{},{},{kappa_txt}\n",
            i + 1,
            fmt(report.gaps[i + 1]),
            fmt(ls),
            fmt(us),
            fmt(report.contraction_ratios[i]),
        ));
    }
    fs::write(dir.join("convergence.csv"), out)?;
    Ok(())
}

fn write_report_json(dir: &Path, report: &RunReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| SolverError::Config(format!("report serialization failed: {e}")))?;
    fs::write(dir.join("report.json"), text)?;
    Ok(())
}

fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::ExtremalPair | SolveStatus::UniqueSolution => EXIT_OK,
        SolveStatus::MonotonicityViolated => EXIT_MONOTONICITY,
        SolveStatus::MaxIterReached => EXIT_MAX_ITER,
    }
}

/// Reference trajectory for an oracle comparison.
fn oracle_reference(
    cfg: &RunConfig,
    problem: &DelayedProblem,
    oracle: &OracleConfig,
) -> Result<PeriodicGridFunction> {
    match oracle.kind {
        OracleKind::Fourier => match cfg.problem.kind {
            ProblemKind::ScalarDelay => fourier_reference(
                cfg.problem.a.unwrap(),
                cfg.problem.k.unwrap(),
                cfg.problem.c.unwrap(),
                problem.delay(),
                problem.period(),
                problem.nodes(),
            ),
            _ => Err(SolverError::Config(
                "the fourier oracle is only defined for scalar_delay problems".into(),
            )),
        },
        OracleKind::Timestep => timestep_oracle(problem, oracle.periods, oracle.substeps),
    }
}

fn write_oracle_csv(
    dir: &Path,
    solved: &PeriodicGridFunction,
    reference: &PeriodicGridFunction,
) -> Result<f64> {
    let mut out = String::from("node,time,component,solver,oracle,error\n");
    let mut max_err: f64 = 0.0;
    for j in 0..solved.nodes() {
        let t = solved.node_time(j);
        for i in 0..solved.dim() {
            let s = solved.value(j as i64)[i];
            let o = reference.value(j as i64)[i];
            let e = (s - o).abs();
            max_err = max_err.max(e);
            out.push_str(&format!("{j},{},{i},{},{},{}\n", fmt(t), fmt(s), fmt(o), fmt(e)));
        }
    }
    fs::write(dir.join("oracle.csv"), out)?;
    Ok(max_err)
}

/// Shared solve pipeline: checks, certificate, iteration, outputs. Returns
/// the exit code.
fn solve_pipeline(cfg: &RunConfig, with_oracle: bool) -> Result<i32> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;
    let problem = cfg.build_problem()?;
    let op = problem.operator()?;
    let checks = cfg.checks;

    let h1 = if checks.h1 {
        Some(solver::check_h1(&problem, checks.samples, checks.seed)?)
    } else {
        None
    };
    let refined = if checks.h3h4h5 {
        Some(solver::check_h3_h4_h5(&problem, checks.samples, checks.seed)?)
    } else {
        None
    };
    let refuted = h1.as_ref().map(|c| !c.ok).unwrap_or(false)
        || refined
            .as_ref()
            .map(|r| !r.h3.ok || !r.h4.ok || !r.h5.ok)
            .unwrap_or(false);

    let certificate = if checks.certificate {
        Some(solver::uniqueness_certificate(&problem, &op)?)
    } else {
        None
    };

    if refuted {
        let report = RunReport {
            status: "hypothesis_refuted".into(),
            exit_code: EXIT_REFUTED,
            iterations: 0,
            final_gap: None,
            fixed_point_residuals: None,
            mild_residuals: None,
            worst_monotone_slack: None,
            checks: ChecksReport { h1, refined },
            certificate,
            violation: None,
            extremality_ok: None,
            oracle: None,
        };
        write_report_json(&dir, &report)?;
        println!("hypothesis refuted; witness written to {}", dir.join("report.json").display());
        return Ok(EXIT_REFUTED);
    }

    let report = solver::iterate(&problem, &op, cfg.grid.tolerance, cfg.grid.max_iter)?;
    write_iterates_csv(&dir, &report)?;
    write_convergence_csv(&dir, &report, certificate.map(|c| c.kappa))?;

    let mut exit_code = status_exit_code(report.status);

    let extremality_ok = if checks.extremality && report.minimal_solution().is_some() {
        let ok = solver::extremality_check(
            &problem,
            &op,
            &report,
            checks.probes,
            checks.seed,
            cfg.grid.tolerance,
            cfg.grid.max_iter,
        )?;
        if !ok && exit_code == EXIT_OK {
            exit_code = EXIT_MONOTONICITY;
        }
        Some(ok)
    } else {
        None
    };

    let oracle_summary = if with_oracle || checks.oracle {
        match (&cfg.oracle, report.minimal_solution()) {
            (Some(oracle_cfg), Some(solution)) => {
                let reference = oracle_reference(cfg, &problem, oracle_cfg)?;
                let max_error = write_oracle_csv(&dir, solution, &reference)?;
                let within = max_error <= oracle_cfg.bound;
                if !within && exit_code == EXIT_OK {
                    exit_code = EXIT_ORACLE_BOUND;
                }
                Some(OracleSummary {
                    kind: match oracle_cfg.kind {
                        OracleKind::Fourier => "fourier".into(),
                        OracleKind::Timestep => "timestep".into(),
                    },
                    bound: oracle_cfg.bound,
                    max_error,
                    within_bound: within,
                })
            }
            (None, _) => {
                return Err(SolverError::Config(
                    "oracle comparison requested but no [oracle] section given".into(),
                ))
            }
            _ => None,
        }
    } else {
        None
    };

    let final_gap = report.gaps.last().copied().filter(|g| g.is_finite());
    let worst_slack = report
        .monotone_slack
        .iter()
        .copied()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    let run_report = RunReport {
        status: report.status.as_str().into(),
        exit_code,
        iterations: report.iterations(),
        final_gap,
        fixed_point_residuals: report.fixed_point_residuals,
        mild_residuals: report.mild_residuals,
        worst_monotone_slack: worst_slack,
        checks: ChecksReport { h1, refined },
        certificate,
        violation: report.violation.clone(),
        extremality_ok,
        oracle: oracle_summary,
    };
    write_report_json(&dir, &run_report)?;
    println!(
        "status: {} ({} iterations), outputs in {}",
        report.status.as_str(),
        report.iterations(),
        dir.display()
    );
    Ok(exit_code)
}

fn error_exit_code(err: &SolverError) -> i32 {
    match err {
        SolverError::InvalidLowerSolution { .. } | SolverError::InvalidUpperSolution { .. } => {
            EXIT_REFUTED
        }
        _ => EXIT_CONFIG,
    }
}

fn run_with(config_path: &Path, f: impl FnOnce(&RunConfig) -> Result<i32>) -> i32 {
    let cfg = match RunConfig::load(config_path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match f(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}

/// `solve <config>`: checks, iteration, certificate, reports.
pub fn run_solve(config_path: &Path) -> i32 {
    run_with(config_path, |cfg| {
        solve_pipeline(cfg, false)
    })
}

/// `check <config>`: only the hypothesis checks enabled in `[checks]`.
pub fn run_check(config_path: &Path) -> i32 {
    run_with(config_path, |cfg| {
        if !cfg.checks.h1 && !cfg.checks.h3h4h5 {
            return Err(SolverError::Config(
                "check: enable at least one of checks.h1 / checks.h3h4h5".into(),
            ));
        }
        let dir = cfg.output_dir();
        fs::create_dir_all(&dir)?;
        let problem = cfg.build_problem()?;
        let h1 = if cfg.checks.h1 {
            Some(solver::check_h1(&problem, cfg.checks.samples, cfg.checks.seed)?)
        } else {
            None
        };
        let refined = if cfg.checks.h3h4h5 {
            Some(solver::check_h3_h4_h5(&problem, cfg.checks.samples, cfg.checks.seed)?)
        } else {
            None
        };
        let refuted = h1.as_ref().map(|c| !c.ok).unwrap_or(false)
            || refined
                .as_ref()
                .map(|r| !r.h3.ok || !r.h4.ok || !r.h5.ok)
                .unwrap_or(false);
        let exit_code = if refuted { EXIT_REFUTED } else { EXIT_OK };
        let report = RunReport {
            status: if refuted { "hypothesis_refuted" } else { "checks_passed" }.into(),
            exit_code,
            iterations: 0,
            final_gap: None,
            fixed_point_residuals: None,
            mild_residuals: None,
            worst_monotone_slack: None,
            checks: ChecksReport { h1, refined },
            certificate: None,
            violation: None,
            extremality_ok: None,
            oracle: None,
        };
        write_report_json(&dir, &report)?;
        println!("{}", report.status);
        Ok(exit_code)
    })
}

/// `certify <config>`: compute the contraction certificate only.
pub fn run_certify(config_path: &Path) -> i32 {
    run_with(config_path, |cfg| {
        let dir = cfg.output_dir();
        fs::create_dir_all(&dir)?;
        let problem = cfg.build_problem()?;
        let op = problem.operator()?;
        let certificate = solver::uniqueness_certificate(&problem, &op)?;
        let report = RunReport {
            status: if certificate.certified {
                "certified"
            } else {
                "not_certified"
            }
            .into(),
            exit_code: EXIT_OK,
            iterations: 0,
            final_gap: None,
            fixed_point_residuals: None,
            mild_residuals: None,
            worst_monotone_slack: None,
            checks: ChecksReport {
                h1: None,
                refined: None,
            },
            certificate: Some(certificate),
            violation: None,
            extremality_ok: None,
            oracle: None,
        };
        write_report_json(&dir, &report)?;
        println!(
            "kappa = {:.6} ({})",
            certificate.kappa,
            if certificate.certified {
                "certified: unique solution"
            } else {
                "not certified"
            }
        );
        Ok(EXIT_OK)
    })
}

/// `oracle <config>`: solve, then compare against the configured oracle;
/// exit 0 iff the max pointwise error is within the configured bound.
pub fn run_oracle(config_path: &Path) -> i32 {
    run_with(config_path, |cfg| {
        if cfg.oracle.is_none() {
            return Err(SolverError::Config(
                "oracle: config needs an [oracle] section".into(),
            ));
        }
        solve_pipeline(cfg, true)
    })
}

/// `sweep <config>`: mesh-refinement study. Solves at `grid.nodes * 2^level`
/// for each level, measures the error against the configured oracle (or the
/// finest solve when no oracle applies) and reports the per-level ratios.
pub fn run_sweep(config_path: &Path) -> i32 {
    run_with(config_path, |cfg| {
        let dir = cfg.output_dir();
        fs::create_dir_all(&dir)?;
        let levels = cfg.sweep.map(|s| s.levels).unwrap_or_else(default_levels);
        if levels < 2 {
            return Err(SolverError::Config("sweep.levels must be >= 2".into()));
        }
        let mut solutions = Vec::new();
        for level in 0..levels {
            let nodes = cfg.grid.nodes << level;
            let problem = cfg.build_problem_with_nodes(nodes)?;
            let op = problem.operator()?;
            let report = solver::iterate(&problem, &op, cfg.grid.tolerance, cfg.grid.max_iter)?;
            match report.minimal_solution() {
                Some(u) => solutions.push((nodes, u.clone(), problem)),
                None => return Ok(status_exit_code(report.status)),
            }
        }

        let mut rows = Vec::new();
        for (idx, (nodes, u, problem)) in solutions.iter().enumerate() {
            let err = match cfg.oracle {
                Some(oracle_cfg) => {
                    let reference = oracle_reference(cfg, problem, &oracle_cfg)?;
                    u.sup_dist(&reference)?
                }
                None => {
                    // compare against the finest level on shared nodes
                    let (fine_nodes, fine, _) = solutions.last().unwrap();
                    let stride = fine_nodes / nodes;
                    let mut worst: f64 = 0.0;
                    for j in 0..*nodes {
                        worst = worst
                            .max((u.value(j as i64) - fine.value((j * stride) as i64)).amax());
                    }
                    worst
                }
            };
            rows.push((idx, *nodes, err));
        }

        let mut out = String::from("level,nodes,max_error,ratio_to_previous\n");
        for (idx, nodes, err) in &rows {
            let ratio = if *idx == 0 {
                String::new()
            } else {
                let prev = rows[idx - 1].2;
                if *err > 0.0 {
                    fmt(prev / err)
                } else {
                    "inf".into()
                }
            };
            out.push_str(&format!("{idx},{nodes},{},{ratio}\n", fmt(*err)));
        }
        fs::write(dir.join("sweep.csv"), &out)?;
        print!("{out}");
        std::io::stdout().flush().ok();
        Ok(EXIT_OK)
    })
}
