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

//! Diagonal proximal metrics and the schedules that produce them.

use serde::{Deserialize, Serialize};

use crate::diagnostics::TraceRecord;
use crate::error::{Error, Result};
use crate::linops::Vector;

/// A diagonal positive definite metric `Q`. `Scalar(q)` stands for `q I` in
/// whatever dimension it is applied to.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagonalMetric {
    Scalar(f64),
    Diagonal(Vector),
}

impl DiagonalMetric {
    /// True when every diagonal entry is the same.
    pub fn is_scalar(&self) -> bool {
        match self {
            Self::Scalar(_) => true,
            Self::Diagonal(d) => d.iter().all(|&x| x == d[0]),
        }
    }

    pub fn weights(&self, dim: usize) -> Vector {
        match self {
            Self::Scalar(q) => Vector::from_element(dim, *q),
            Self::Diagonal(d) => d.clone(),
        }
    }

    /// `Q v`
    pub fn apply(&self, v: &Vector) -> Vector {
        match self {
            Self::Scalar(q) => v * *q,
            Self::Diagonal(d) => d.component_mul(v),
        }
    }

    /// `Q^{-1} v`
    pub fn solve(&self, v: &Vector) -> Vector {
        match self {
            Self::Scalar(q) => v / *q,
            Self::Diagonal(d) => v.component_div(d),
        }
    }

    /// `|v|_Q^2 = <v, Q v>`
    pub fn norm_squared(&self, v: &Vector) -> f64 {
        match self {
            Self::Scalar(q) => q * v.norm_squared(),
            Self::Diagonal(d) => d.iter().zip(v.iter()).map(|(q, x)| q * x * x).sum(),
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            Self::Scalar(q) => *q,
            Self::Diagonal(d) => d.min(),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Self::Scalar(q) => *q,
            Self::Diagonal(d) => d.max(),
        }
    }

    pub fn dim_matches(&self, dim: usize) -> bool {
        match self {
            Self::Scalar(_) => true,
            Self::Diagonal(d) => d.len() == dim,
        }
    }
}

/// Rule producing the metrics `(Q1^k, Q2^k)` for each iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricSchedule {
    FixedScaledIdentity { q1: f64, q2: f64 },
    FixedDiagonal { q1: Vec<f64>, q2: Vec<f64> },
    /// Scaled identity for `Q1` that halves after a streak of five clean
    /// iterations and doubles after any certificate failure, clamped to
    /// `[q1_inf, q1_sup]`. `Q2` stays fixed.
    AdaptiveScaledIdentity {
        q1_init: f64,
        q1_inf: f64,
        q1_sup: f64,
        q2: f64,
    },
}

/// Uniform eigenvalue bounds over every metric a schedule may produce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricBounds {
    pub q1_inf: f64,
    pub q1_sup: f64,
    pub q2_inf: f64,
    pub q2_sup: f64,
}

pub const ADAPTIVE_STREAK: usize = 5;

impl MetricSchedule {
    pub fn fixed(q1: f64, q2: f64) -> Self {
        Self::FixedScaledIdentity { q1, q2 }
    }

    pub fn bounds(&self) -> MetricBounds {
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match self {
            Self::FixedScaledIdentity { q1, q2 } => MetricBounds {
                q1_inf: *q1,
                q1_sup: *q1,
                q2_inf: *q2,
                q2_sup: *q2,
            },
            Self::FixedDiagonal { q1, q2 } => MetricBounds {
                q1_inf: min(q1),
                q1_sup: max(q1),
                q2_inf: min(q2),
                q2_sup: max(q2),
            },
            Self::AdaptiveScaledIdentity {
                q1_inf, q1_sup, q2, ..
            } => MetricBounds {
                q1_inf: *q1_inf,
                q1_sup: *q1_sup,
                q2_inf: *q2,
                q2_sup: *q2,
            },
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let b = self.bounds();
        let ok = |lo: f64, hi: f64| lo > 0.0 && lo <= hi && hi.is_finite();
        if !ok(b.q1_inf, b.q1_sup) || !ok(b.q2_inf, b.q2_sup) {
            return Err(Error::Parameter(format!(
                "metric bounds must satisfy 0 < q_inf <= q_sup < inf, got {b:?}"
            )));
        }
        match self {
            Self::FixedDiagonal { q1, q2 } => {
                crate::error::check_dim("Q1 diagonal", n, q1.len())?;
                crate::error::check_dim("Q2 diagonal", m, q2.len())?;
            }
            Self::AdaptiveScaledIdentity {
                q1_init,
                q1_inf,
                q1_sup,
                ..
            } => {
                if !(q1_init >= q1_inf && q1_init <= q1_sup) {
                    return Err(Error::Parameter(format!(
                        "q1_init {q1_init} outside [{q1_inf}, {q1_sup}]"
                    )));
                }
            }
            Self::FixedScaledIdentity { .. } => {}
        }
        Ok(())
    }
}

/// Metrics for iteration `k`, given the trace recorded so far.
///
/// The adaptive rule reads its current `Q1` scale back from the last record,
/// so the function stays pure in `(schedule, history)`.
pub fn metric_next(
    schedule: &MetricSchedule,
    _k: usize,
    history: &[TraceRecord],
) -> Result<(DiagonalMetric, DiagonalMetric)> {
    let (q1, q2) = match schedule {
        MetricSchedule::FixedScaledIdentity { q1, q2 } => {
            (DiagonalMetric::Scalar(*q1), DiagonalMetric::Scalar(*q2))
        }
        MetricSchedule::FixedDiagonal { q1, q2 } => (
            DiagonalMetric::Diagonal(Vector::from_column_slice(q1)),
            DiagonalMetric::Diagonal(Vector::from_column_slice(q2)),
        ),
        MetricSchedule::AdaptiveScaledIdentity {
            q1_init,
            q1_inf,
            q1_sup,
            q2,
        } => {
            let current = history.last().map_or(*q1_init, |r| r.q1);
            let next = match history.last() {
                Some(last) if !last.certificates.all_passed() => (2.0 * current).min(*q1_sup),
                Some(_) => {
                    let streak = history
                        .iter()
                        .rev()
                        .take_while(|r| r.q1 == current && r.certificates.all_passed())
                        .count();
                    if streak >= ADAPTIVE_STREAK {
                        (0.5 * current).max(*q1_inf)
                    } else {
                        current
                    }
                }
                None => current,
            };
            (DiagonalMetric::Scalar(next), DiagonalMetric::Scalar(*q2))
        }
    };
    let bounds = schedule.bounds();
    for (metric, lower, upper) in [
        (&q1, bounds.q1_inf, bounds.q1_sup),
        (&q2, bounds.q2_inf, bounds.q2_sup),
    ] {
        for value in [metric.min(), metric.max()] {
            if !(value >= lower && value <= upper) {
                return Err(Error::ScheduleContract {
                    value,
                    lower,
                    upper,
                });
            }
        }
    }
    Ok((q1, q2))
}
