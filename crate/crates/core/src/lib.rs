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

//! Variable metric proximal linearized ADMM with over-relaxation for
//!
//! ```text
//! min f(x) + g(x) + h(y)   s.t.   A x + B y + c = 0
//! ```
//!
//! with `f` proper and lower semicontinuous (prox-friendly), `g` and `h`
//! Lipschitz differentiable, together with per-iteration checks of the
//! descent and subgradient inequalities that drive its convergence theory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod linops;
pub mod oracles;
pub mod problems;
pub mod reference;
pub mod solver;

pub use diagnostics::{
    aug_lagrangian, check_sufficient_decrease, compute_constants, fit_kl_rate, reg_lagrangian,
    stationarity_residual, subgradient_witness, AuditReport, RateFit, Regime, TheoryConstants,
    TraceRecord,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use linops::{GramSide, LinearOperator, Matrix, MatrixFree, Mode, Vector};
pub use oracles::{prox, smooth_eval, Penalty, ProxFunction, SmoothFunction};
pub use solver::{
    solve, solve_batch, step, DiagonalMetric, InitialPoint, IterateState, MetricSchedule,
    ProblemSpec, SolveOutcome, SolveStatus, SolverConfig,
};
