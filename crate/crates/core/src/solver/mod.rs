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

//! The iteration engine: prox-linear x-step, exact quadratic y-step and
//! over-relaxed multiplier step, driven by a diagonal metric schedule.

pub mod schedule;
pub mod ysolve;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, AuditReport, TheoryConstants, TraceRecord};
use crate::error::{check_dim, Error, Result};
use crate::exec::{self, Execution};
use crate::linops::{GramSide, LinearOperator, Vector};
use crate::oracles::{prox, ProxFunction, SmoothFunction};

pub use schedule::{metric_next, DiagonalMetric, MetricBounds, MetricSchedule};
pub use ysolve::YSystemSolver;

/// Iterates whose norm exceeds this are reported as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// `min f(x) + g(x) + h(y)  s.t.  A x + B y + c = 0`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub f: Arc<dyn ProxFunction>,
    pub g: Arc<dyn SmoothFunction>,
    pub h: Arc<dyn SmoothFunction>,
    pub a: LinearOperator,
    pub b: LinearOperator,
    pub c: Vector,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("f", &self.f.family())
            .field("g", &self.g)
            .field("h", &self.h)
            .field("a", &self.a.kind())
            .field("b", &self.b.kind())
            .field("n", &self.n())
            .field("m", &self.m())
            .field("p", &self.p())
            .finish()
    }
}

/// Spectral and smoothness constants of a problem instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpectrum {
    pub norm_a: f64,
    pub norm_b: f64,
    pub lam_min_ata: f64,
    pub lam_min_btb: f64,
    pub lam_min_bbt: f64,
    pub lipschitz_g: f64,
    pub lipschitz_h: f64,
}

impl ProblemSpec {
    pub fn new(
        f: Arc<dyn ProxFunction>,
        g: Arc<dyn SmoothFunction>,
        h: Arc<dyn SmoothFunction>,
        a: LinearOperator,
        b: LinearOperator,
        c: Vector,
    ) -> Self {
        Self { f, g, h, a, b, c }
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    pub fn p(&self) -> usize {
        self.c.len()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        check_dim("rows of A", self.p(), self.a.rows())?;
        check_dim("rows of B", self.p(), self.b.rows())?;
        check_dim("dimension of g", self.n(), self.g.dim())?;
        check_dim("dimension of h", self.m(), self.h.dim())?;
        Ok(())
    }

    /// Norms, Gram eigenvalues and Lipschitz constants.
    pub fn spectrum(&self) -> Result<ProblemSpectrum> {
        Ok(ProblemSpectrum {
            norm_a: self.a.op_norm_default()?,
            norm_b: self.b.op_norm_default()?,
            lam_min_ata: self.a.gram_min_eig(GramSide::Gram)?,
            lam_min_btb: self.b.gram_min_eig(GramSide::Gram)?,
            lam_min_bbt: self.b.gram_min_eig(GramSide::Cogram)?,
            lipschitz_g: self.g.lipschitz(),
            lipschitz_h: self.h.lipschitz(),
        })
    }

    /// Dimension checks plus positivity of both Gram eigenvalues of `B`.
    pub fn validate(&self) -> Result<ProblemSpectrum> {
        self.check_dimensions()?;
        let spectrum = self.spectrum()?;
        if !(spectrum.lam_min_btb > 0.0 && spectrum.lam_min_bbt > 0.0) {
            return Err(Error::Parameter(format!(
                "B must have lambda_min(B*B) > 0 and lambda_min(BB*) > 0, got {} and {}",
                spectrum.lam_min_btb, spectrum.lam_min_bbt
            )));
        }
        Ok(spectrum)
    }

    pub fn residual(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        Ok(self.a.forward(x)? + self.b.forward(y)? + &self.c)
    }

    /// `f(x) + g(x) + h(y)`
    pub fn objective(&self, x: &Vector, y: &Vector) -> f64 {
        self.f.value(x) + self.g.value(x) + self.h.value(y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Penalty parameter.
    pub alpha: f64,
    /// Over-relaxation of the multiplier step, in `(0, 2)`.
    pub beta: f64,
    /// Weight of the correction terms in the regularized Lagrangian, `> 1`.
    pub r: f64,
    pub schedule: MetricSchedule,
    pub max_iter: usize,
    pub tol_delta: f64,
    pub tol_residual: f64,
    pub beta_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            r: 2.0,
            schedule: MetricSchedule::fixed(1.0, 1.0),
            max_iter: 10_000,
            tol_delta: 1e-8,
            tol_residual: 1e-8,
            beta_guard: 0.05,
        }
    }
}

impl SolverConfig {
    pub fn check_beta(&self) -> Result<()> {
        let upper = 2.0 - self.beta_guard;
        if !(self.beta >= self.beta_guard && self.beta <= upper) {
            return Err(Error::BetaGuard {
                beta: self.beta,
                guard: self.beta_guard,
                upper,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 2.0) {
            return Err(Error::Parameter(format!("beta must lie in (0, 2), got {}", self.beta)));
        }
        if !(self.beta_guard > 0.0 && self.beta_guard < 1.0) {
            return Err(Error::Parameter(format!(
                "beta_guard must lie in (0, 1), got {}",
                self.beta_guard
            )));
        }
        self.check_beta()?;
        if !(self.r > 1.0 && self.r.is_finite()) {
            return Err(Error::Parameter(format!("r must be > 1, got {}", self.r)));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be positive".into()));
        }
        if !(self.tol_delta > 0.0 && self.tol_residual > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// `(x^k, y^k, z^k)` with the lagged `y^{k-1}, z^{k-1}` and the cached
/// constraint residual `A x^k + B y^k + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateState {
    pub k: usize,
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub y_prev: Vector,
    pub z_prev: Vector,
    pub residual: Vector,
    /// Metrics of the step that produced this state; `None` for a start point.
    pub metrics: Option<(DiagonalMetric, DiagonalMetric)>,
}

impl IterateState {
    /// Start point with the lagged copies equal to the current ones.
    pub fn initial(prob: &ProblemSpec, x: Vector, y: Vector, z: Vector) -> Result<Self> {
        check_dim("initial x", prob.n(), x.len())?;
        check_dim("initial y", prob.m(), y.len())?;
        check_dim("initial z", prob.p(), z.len())?;
        let residual = prob.residual(&x, &y)?;
        Ok(Self {
            k: 0,
            y_prev: y.clone(),
            z_prev: z.clone(),
            x,
            y,
            z,
            residual,
            metrics: None,
        })
    }

    pub fn zeros(prob: &ProblemSpec) -> Result<Self> {
        Self::initial(
            prob,
            Vector::zeros(prob.n()),
            Vector::zeros(prob.m()),
            Vector::zeros(prob.p()),
        )
    }

    fn is_finite(&self) -> bool {
        [&self.x, &self.y, &self.z]
            .iter()
            .all(|v| v.iter().all(|t| t.is_finite()))
    }

    fn max_norm(&self) -> f64 {
        self.x.norm().max(self.y.norm()).max(self.z.norm())
    }
}

/// Linear coefficient of the x-surrogate,
/// `p = grad g(x) + A*(z + alpha (A x + B y + c))`.
pub fn x_linear_term(state: &IterateState, prob: &ProblemSpec, alpha: f64) -> Result<Vector> {
    let dual = &state.z + &state.residual * alpha;
    Ok(prob.g.gradient(&state.x) + prob.a.adjoint(&dual)?)
}

/// Minimizer of the prox-linear surrogate: `prox_f(x - Q1^{-1} p)` in the `Q1` metric.
pub fn x_update(
    state: &IterateState,
    prob: &ProblemSpec,
    q1: &DiagonalMetric,
    cfg: &SolverConfig,
) -> Result<Vector> {
    if !prob.f.is_separable() && !q1.is_scalar() {
        return Err(Error::UnsupportedMetric(prob.f.family().to_string()));
    }
    if !q1.dim_matches(prob.n()) {
        return Err(Error::Dimension {
            context: "Q1 diagonal",
            expected: prob.n(),
            got: q1.weights(prob.n()).len(),
        });
    }
    let p = x_linear_term(state, prob, cfg.alpha)?;
    let v = &state.x - q1.solve(&p);
    prox(prob.f.as_ref(), &v, &q1.weights(prob.n()))
}

/// Right-hand side `Q2 y^k - grad h(y^k) - B* z^k - alpha B*(A x_new + c)`.
fn y_rhs(
    state: &IterateState,
    x_new: &Vector,
    prob: &ProblemSpec,
    q2: &DiagonalMetric,
    alpha: f64,
) -> Result<Vector> {
    let ax_c = prob.a.forward(x_new)? + &prob.c;
    let shifted = &state.z + ax_c * alpha;
    Ok(q2.apply(&state.y) - prob.h.gradient(&state.y) - prob.b.adjoint(&shifted)?)
}

/// Solves `(alpha B*B + Q2) y = Q2 y^k - grad h(y^k) - B* z^k - alpha B*(A x_new + c)`.
pub fn y_update(
    state: &IterateState,
    x_new: &Vector,
    prob: &ProblemSpec,
    q2: &DiagonalMetric,
    cfg: &SolverConfig,
) -> Result<Vector> {
    y_update_cached(state, x_new, prob, q2, cfg, &mut YSystemSolver::new())
}

pub fn y_update_cached(
    state: &IterateState,
    x_new: &Vector,
    prob: &ProblemSpec,
    q2: &DiagonalMetric,
    cfg: &SolverConfig,
    solver: &mut YSystemSolver,
) -> Result<Vector> {
    if !q2.dim_matches(prob.m()) {
        return Err(Error::Dimension {
            context: "Q2 diagonal",
            expected: prob.m(),
            got: q2.weights(prob.m()).len(),
        });
    }
    let rhs = y_rhs(state, x_new, prob, q2, cfg.alpha)?;
    if !rhs.iter().all(|t| t.is_finite()) {
        return Err(Error::Numerical { iteration: state.k + 1 });
    }
    solver.solve(&prob.b, cfg.alpha, q2, &rhs)
}

/// `z + alpha beta residual`
pub fn z_update(z: &Vector, residual: &Vector, alpha: f64, beta: f64) -> Vector {
    z + residual * (alpha * beta)
}

/// One sweep with the schedule's metrics for iteration `state.k` (no
/// history, so adaptive schedules use their initial scale).
pub fn step(state: &IterateState, prob: &ProblemSpec, cfg: &SolverConfig) -> Result<IterateState> {
    let (q1, q2) = metric_next(&cfg.schedule, state.k, &[])?;
    step_with(state, prob, cfg, &q1, &q2, &mut YSystemSolver::new())
}

pub fn step_with(
    state: &IterateState,
    prob: &ProblemSpec,
    cfg: &SolverConfig,
    q1: &DiagonalMetric,
    q2: &DiagonalMetric,
    ysolver: &mut YSystemSolver,
) -> Result<IterateState> {
    let x = x_update(state, prob, q1, cfg)?;
    if !x.iter().all(|t| t.is_finite()) {
        return Err(Error::Numerical { iteration: state.k + 1 });
    }
    let y = y_update_cached(state, &x, prob, q2, cfg, ysolver)?;
    let residual = prob.residual(&x, &y)?;
    let z = z_update(&state.z, &residual, cfg.alpha, cfg.beta);
    Ok(IterateState {
        k: state.k + 1,
        x,
        y_prev: state.y.clone(),
        z_prev: state.z.clone(),
        y,
        z,
        residual,
        metrics: Some((q1.clone(), q2.clone())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Clone, Debug)]
pub struct InitialPoint {
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
}

impl InitialPoint {
    pub fn zeros(prob: &ProblemSpec) -> Self {
        Self {
            x: Vector::zeros(prob.n()),
            y: Vector::zeros(prob.m()),
            z: Vector::zeros(prob.p()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub state: IterateState,
    pub trace: Vec<TraceRecord>,
    pub status: SolveStatus,
    pub constants: TheoryConstants,
    pub audit: AuditReport,
}

impl SolveOutcome {
    pub fn violation_count(&self) -> usize {
        self.trace.iter().map(|r| r.certificates.failures()).sum()
    }
}

/// Runs the iteration from `init` until the joint step-size and
/// feasibility test passes, `max_iter` is hit, or the iterates blow up.
pub fn solve(prob: &ProblemSpec, cfg: &SolverConfig, init: &InitialPoint) -> Result<SolveOutcome> {
    cfg.validate()?;
    let spectrum = prob.validate()?;
    cfg.schedule.validate(prob.n(), prob.m())?;
    let constants = diagnostics::constants_from_spectrum(&spectrum, cfg)?;
    let audit = diagnostics::check_sufficient_decrease(&constants);

    let mut state = IterateState::initial(prob, init.x.clone(), init.y.clone(), init.z.clone())?;
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut ysolver = YSystemSolver::new();
    let mut status = SolveStatus::MaxIter;

    for k in 0..cfg.max_iter {
        let (q1, q2) = metric_next(&cfg.schedule, k, &trace)?;
        let next = step_with(&state, prob, cfg, &q1, &q2, &mut ysolver)?;
        if !next.is_finite() {
            return Err(Error::Numerical { iteration: next.k });
        }
        let record = diagnostics::assess_step(prob, &constants, audit.passed, &state, &next)?;
        let delta_sum = record.delta_x + record.delta_y + record.delta_z;
        let residual_norm = record.residual_norm;
        trace.push(record);
        state = next;
        if state.max_norm() > DIVERGENCE_THRESHOLD {
            status = SolveStatus::Diverged;
            break;
        }
        if delta_sum < cfg.tol_delta && residual_norm < cfg.tol_residual {
            status = SolveStatus::Converged;
            break;
        }
    }

    Ok(SolveOutcome {
        state,
        trace,
        status,
        constants,
        audit,
    })
}

/// Independent solves, in parallel when the `parallel` feature is on and
/// `execution` asks for it. Results keep the input order.
pub fn solve_batch(
    jobs: &[(ProblemSpec, SolverConfig, InitialPoint)],
    execution: Execution,
) -> Vec<Result<SolveOutcome>> {
    exec::map(jobs, execution, |(prob, cfg, init)| solve(prob, cfg, init))
}
