/*
Copyright 2026 The vmpladmm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Batch experiment runner: `run <config>` and `audit <config>`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    check_sufficient_decrease, compute_constants, fit_kl_rate, lyapunov_gaps, rate, stationarity_residual,
    write_trace_csv, AuditReport, CertificateKind, RateFit, StationarityResidual, TheoryConstants,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linops::Vector;
use crate::problems::{BenchmarkInstance, ProblemDescriptor};
use crate::solver::{solve, InitialPoint, MetricSchedule, SolveOutcome, SolveStatus, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;
pub const EXIT_AUDIT_FAIL: i32 = 3;

fn default_alpha() -> f64 {
    1.0
}
fn default_r() -> f64 {
    2.0
}
fn default_q1_per_alpha() -> f64 {
    2.0
}
fn default_q2() -> f64 {
    1.0
}
fn default_max_iter() -> usize {
    10_000
}
fn default_tol() -> f64 {
    1e-8
}
fn default_beta_guard() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Penalty parameter, or the start of the audit's doubling grid when
    /// `auto_alpha` is set.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub auto_alpha: bool,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Sweep over several `beta`; takes precedence over `beta`.
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default = "default_r")]
    pub r: f64,
    /// Explicit metric schedule. Without it `Q1 = q1_per_alpha * alpha * I`
    /// and `Q2 = q2 * I`.
    #[serde(default)]
    pub schedule: Option<MetricSchedule>,
    #[serde(default = "default_q1_per_alpha")]
    pub q1_per_alpha: f64,
    #[serde(default = "default_q2")]
    pub q2: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol_delta: f64,
    #[serde(default = "default_tol")]
    pub tol_residual: f64,
    #[serde(default = "default_beta_guard")]
    pub beta_guard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemDescriptor,
    pub solver: SolverSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Run sweep members one after another instead of on the thread pool.
    #[serde(default = "default_true")]
    pub deterministic: bool,
    /// Seed for a start point with `x = y` uniform in `[-1, 1]` and `z = 0`;
    /// the origin when absent.
    #[serde(default)]
    pub init_seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn betas(&self) -> Result<Vec<f64>> {
        match (&self.solver.betas, self.solver.beta) {
            (Some(list), _) if !list.is_empty() => Ok(list.clone()),
            (Some(_), _) => Err(Error::Config("betas must not be empty".into())),
            (None, Some(b)) => Ok(vec![b]),
            (None, None) => Err(Error::Config("one of beta or betas is required".into())),
        }
    }

    pub fn initial_point(&self, instance: &BenchmarkInstance) -> InitialPoint {
        let prob = &instance.problem;
        let mut init = InitialPoint::zeros(prob);
        if let Some(seed) = self.init_seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = Vector::from_fn(prob.n(), |_, _| rng.random_range(-1.0..=1.0));
            if prob.n() == prob.m() {
                init.y = start.clone();
            }
            init.x = start;
        }
        init
    }

    fn schedule_for(&self, alpha: f64) -> MetricSchedule {
        self.solver
            .schedule
            .clone()
            .unwrap_or_else(|| MetricSchedule::fixed(self.solver.q1_per_alpha * alpha, self.solver.q2))
    }

    fn config_for(&self, alpha: f64, beta: f64) -> SolverConfig {
        SolverConfig {
            alpha,
            beta,
            r: self.solver.r,
            schedule: self.schedule_for(alpha),
            max_iter: self.solver.max_iter,
            tol_delta: self.solver.tol_delta,
            tol_residual: self.solver.tol_residual,
            beta_guard: self.solver.beta_guard,
        }
    }

    /// Validated solver configuration for one sweep member. With
    /// `auto_alpha`, `alpha` is the audit's suggestion.
    pub fn solver_config(&self, instance: &BenchmarkInstance, beta: f64) -> Result<SolverConfig> {
        let base = self.config_for(self.solver.alpha, beta);
        base.validate()?;
        if !self.solver.auto_alpha {
            return Ok(base);
        }
        let report = check_sufficient_decrease(&compute_constants(&instance.problem, &base)?);
        let alpha = report.suggested_alpha.ok_or_else(|| {
            Error::Parameter(format!(
                "no alpha in the audit grid starting at {} passes the sufficient-decrease audit",
                self.solver.alpha
            ))
        })?;
        let cfg = self.config_for(alpha, beta);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub norm_x: f64,
    pub norm_y: f64,
    pub norm_z: f64,
    pub objective: f64,
    pub lagrangian: Option<f64>,
    pub reg_lagrangian: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub beta: f64,
    pub alpha: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_state: FinalState,
    pub stationarity: StationarityResidual,
    pub certificate_violations: BTreeMap<String, usize>,
    pub total_violations: usize,
    pub rate_fit: Option<RateFit>,
    pub rate_fit_error: Option<String>,
    pub constants: TheoryConstants,
    pub audit: AuditReport,
}

impl RunSummary {
    pub fn clean(&self) -> bool {
        self.status == SolveStatus::Converged && self.total_violations == 0
    }
}

pub fn summarize(instance: &BenchmarkInstance, cfg: &SolverConfig, out: &SolveOutcome) -> Result<RunSummary> {
    let prob = &instance.problem;
    let st = &out.state;
    let mut violations = BTreeMap::new();
    for kind in CertificateKind::ALL {
        let count = out
            .trace
            .iter()
            .filter(|r| r.certificates.get(kind).is_fail())
            .count();
        violations.insert(kind.name().to_string(), count);
    }
    let gaps = lyapunov_gaps(&out.trace.iter().map(|r| r.reg_lagrangian).collect::<Vec<_>>());
    let (rate_fit, rate_fit_error) = match fit_kl_rate(&gaps, rate::DEFAULT_TAIL_FRACTION) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(RunSummary {
        beta: cfg.beta,
        alpha: cfg.alpha,
        status: out.status,
        iterations: out.trace.len(),
        final_state: FinalState {
            norm_x: st.x.norm(),
            norm_y: st.y.norm(),
            norm_z: st.z.norm(),
            objective: prob.objective(&st.x, &st.y),
            lagrangian: out.trace.last().map(|r| r.lagrangian),
            reg_lagrangian: out.trace.last().map(|r| r.reg_lagrangian),
        },
        stationarity: stationarity_residual(prob, &st.x, &st.y, &st.z)?,
        total_violations: out.violation_count(),
        certificate_violations: violations,
        rate_fit,
        rate_fit_error,
        constants: out.constants,
        audit: out.audit.clone(),
    })
}

pub fn beta_dir_name(beta: f64) -> String {
    format!("beta_{beta}")
}

/// Solves one sweep member and writes `trace.csv` and `summary.json` under
/// `out_dir/beta_<beta>`.
pub fn run_member(config: &ExperimentConfig, instance: &BenchmarkInstance, beta: f64, out_dir: &Path) -> Result<RunSummary> {
    let cfg = config.solver_config(instance, beta)?;
    let outcome = solve(&instance.problem, &cfg, &config.initial_point(instance))?;
    let summary = summarize(instance, &cfg, &outcome)?;
    let dir = out_dir.join(beta_dir_name(beta));
    fs::create_dir_all(&dir)?;
    write_trace_csv(BufWriter::new(File::create(dir.join("trace.csv"))?), &outcome.trace)?;
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("summary.json"))?), &summary)?;
    Ok(summary)
}

pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<RunSummary>> {
    let betas = config.betas()?;
    let instance = config.problem.build()?;
    for &beta in &betas {
        config.solver_config(&instance, beta)?;
    }
    let execution = if config.deterministic {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    exec::map(&betas, execution, |&beta| run_member(config, &instance, beta, out_dir))
        .into_iter()
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditEntry {
    pub beta: f64,
    pub constants: TheoryConstants,
    pub report: AuditReport,
}

/// Audit of every sweep member at the `alpha` the run would use.
pub fn audit_experiment(config: &ExperimentConfig) -> Result<Vec<AuditEntry>> {
    let instance = config.problem.build()?;
    config
        .betas()?
        .into_iter()
        .map(|beta| {
            let cfg = config.solver_config(&instance, beta)?;
            let constants = compute_constants(&instance.problem, &cfg)?;
            Ok(AuditEntry {
                beta,
                report: check_sufficient_decrease(&constants),
                constants,
            })
        })
        .collect()
}

#[derive(Debug, Parser)]
#[command(name = "vmpladmm", version, about = "Variable metric proximal linearized ADMM experiment runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Iteration limit; overrides the config.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every configured run and write traces and summaries.
    Run { config: PathBuf },
    /// Print the theory constants and the sufficient-decrease audit.
    Audit { config: PathBuf },
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(n) = cli.max_iter {
        config.solver.max_iter = n;
    }
    Ok(config)
}

fn print_audit(entry: &AuditEntry) {
    let c = &entry.constants;
    let i = &c.inputs;
    let r = &entry.report;
    let verdict = |ok: bool| if ok { "pass" } else { "fail" };
    println!("beta = {}  alpha = {}  r = {}", entry.beta, i.alpha, i.r);
    println!("  theta0 = {:.6e}  gamma0 = {:.6e}  theta1 = {:.6e}", c.theta0, c.gamma0, c.theta1);
    println!("  rho = {:.6e}  rho_tilde = {:.6e}", c.rho, c.rho_tilde);
    let sigma1_note = if r.sigma1_unconditional {
        " (unconditional: L_g = 0)"
    } else {
        ""
    };
    println!("  sigma1 = {:.6e}  {}{}", r.sigma1, verdict(r.sigma1_pass), sigma1_note);
    println!("  sigma2 = {:.6e}  {}", r.sigma2, verdict(r.sigma2_pass));
    println!("  sigma  = {:.6e}  {}", r.sigma, verdict(r.sigma_pass));
    println!("  audit: {}", verdict(r.passed));
    match r.suggested_alpha {
        Some(a) if !r.passed => println!("  suggested alpha: {a}"),
        None => println!("  suggested alpha: none found"),
        Some(_) => {}
    }
    println!("  note: {}", r.note);
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run { config } => {
            let config = load(cli, config)?;
            let summaries = run_experiment(&config, &config.output_dir)?;
            if !cli.quiet {
                for s in &summaries {
                    println!(
                        "beta = {}  alpha = {}  status = {:?}  iterations = {}  violations = {}  objective = {:.12e}",
                        s.beta, s.alpha, s.status, s.iterations, s.total_violations, s.final_state.objective
                    );
                }
            }
            Ok(if summaries.iter().all(RunSummary::clean) {
                EXIT_OK
            } else {
                EXIT_VIOLATIONS
            })
        }
        Command::Audit { config } => {
            let config = load(cli, config)?;
            let entries = audit_experiment(&config)?;
            if !cli.quiet {
                entries.iter().for_each(print_audit);
            }
            Ok(if entries.iter().all(|e| e.report.passed) {
                EXIT_OK
            } else {
                EXIT_AUDIT_FAIL
            })
        }
    }
}

/// Parses `args` (program name first) and returns the exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}
