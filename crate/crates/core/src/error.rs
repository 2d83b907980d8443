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

use thiserror::Error;

/// Everything that can go wrong while building a problem, running the
/// iteration or evaluating diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("power iteration did not converge within {iterations} iterations")]
    Convergence { iterations: usize },
    #[error("matrix-free operator has no declared {0}")]
    MissingBound(&'static str),
    #[error("prox weights must be finite and strictly positive (index {index}, value {value})")]
    Weight { index: usize, value: f64 },
    #[error("non-separable prox function `{0}` cannot be used with a non-scalar metric")]
    UnsupportedMetric(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("beta = {beta} lies outside the guarded interval [{guard}, {upper}]")]
    BetaGuard { beta: f64, guard: f64, upper: f64 },
    #[error("metric schedule produced {value} outside [{lower}, {upper}]")]
    ScheduleContract { value: f64, lower: f64, upper: f64 },
    #[error("non-finite value in iterate at iteration {iteration}")]
    Numerical { iteration: usize },
    #[error("metrics passed to the witness do not match the ones that produced iterate {iteration}")]
    StaleMetric { iteration: usize },
    #[error("need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("enumeration over {n} variables exceeds the cap of {max_n}")]
    Scale { n: usize, max_n: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            got,
        })
    }
}
