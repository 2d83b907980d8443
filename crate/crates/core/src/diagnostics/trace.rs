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

//! Per-iteration trace rows and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// The prox-linear surrogate does not increase along the x-step.
    XSurrogate,
    DescentX,
    DescentY,
    /// One-step bound on the augmented Lagrangian.
    LagrangianDescent,
    /// Multiplier differences controlled by primal differences.
    DualBound,
    /// Decrease of the regularized Lagrangian with margin sigma.
    SufficientDecrease,
    SubgradientBound,
    RegSubgradientBound,
}

impl CertificateKind {
    pub const ALL: [CertificateKind; 8] = [
        CertificateKind::XSurrogate,
        CertificateKind::DescentX,
        CertificateKind::DescentY,
        CertificateKind::LagrangianDescent,
        CertificateKind::DualBound,
        CertificateKind::SufficientDecrease,
        CertificateKind::SubgradientBound,
        CertificateKind::RegSubgradientBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::XSurrogate => "x_surrogate",
            CertificateKind::DescentX => "descent_x",
            CertificateKind::DescentY => "descent_y",
            CertificateKind::LagrangianDescent => "lagrangian_descent",
            CertificateKind::DualBound => "dual_bound",
            CertificateKind::SufficientDecrease => "sufficient_decrease",
            CertificateKind::SubgradientBound => "subgradient_bound",
            CertificateKind::RegSubgradientBound => "reg_subgradient_bound",
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).unwrap_or(0)
    }
}

/// Result of one inequality check. `slack` is the bound side minus the
/// checked side, before tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Pass { slack: f64 },
    Fail { slack: f64 },
    Skipped,
}

impl Outcome {
    /// `lhs <= rhs + tol`, with infinite sides handled without subtraction.
    pub fn check(lhs: f64, rhs: f64, tol: f64) -> Self {
        if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY {
            return Outcome::Pass { slack: f64::INFINITY };
        }
        let slack = rhs - lhs;
        if slack.is_nan() {
            return Outcome::Fail { slack };
        }
        if slack >= -tol {
            Outcome::Pass { slack }
        } else {
            Outcome::Fail { slack }
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail { .. })
    }

    pub fn slack(&self) -> Option<f64> {
        match *self {
            Outcome::Pass { slack } | Outcome::Fail { slack } => Some(slack),
            Outcome::Skipped => None,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Outcome::Pass { .. } => "pass",
            Outcome::Fail { .. } => "fail",
            Outcome::Skipped => "skip",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    outcomes: [Outcome; 8],
}

impl Default for Certificates {
    fn default() -> Self {
        Self {
            outcomes: [Outcome::Skipped; 8],
        }
    }
}

impl Certificates {
    pub fn set(&mut self, kind: CertificateKind, outcome: Outcome) {
        self.outcomes[kind.index()] = outcome;
    }

    pub fn get(&self, kind: CertificateKind) -> Outcome {
        self.outcomes[kind.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (CertificateKind, Outcome)> + '_ {
        CertificateKind::ALL.iter().map(move |&k| (k, self.get(k)))
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_fail()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }
}

/// Diagnostics for the step that produced iterate `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub lagrangian: f64,
    pub reg_lagrangian: f64,
    pub objective: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    pub delta_z: f64,
    pub residual_norm: f64,
    pub d_norm: f64,
    pub d_bound: f64,
    pub s_norm: f64,
    pub s_bound: f64,
    /// Largest entry of the `Q1` used by the step.
    pub q1: f64,
    pub q2: f64,
    pub certificates: Certificates,
}

impl TraceRecord {
    pub fn delta_sum(&self) -> f64 {
        self.delta_x + self.delta_y + self.delta_z
    }

    pub fn delta_sq_sum(&self) -> f64 {
        self.delta_x.powi(2) + self.delta_y.powi(2) + self.delta_z.powi(2)
    }
}

const BASE_COLUMNS: [&str; 14] = [
    "k",
    "lagrangian",
    "reg_lagrangian",
    "objective",
    "delta_x",
    "delta_y",
    "delta_z",
    "residual_norm",
    "d_norm",
    "d_bound",
    "s_norm",
    "s_bound",
    "q1",
    "q2",
];

pub fn csv_header() -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    for kind in CertificateKind::ALL {
        cols.push(kind.name().to_string());
        cols.push(format!("{}_slack", kind.name()));
    }
    cols
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(r: &TraceRecord) -> Vec<String> {
    let mut row = vec![r.k.to_string()];
    row.extend(
        [
            r.lagrangian,
            r.reg_lagrangian,
            r.objective,
            r.delta_x,
            r.delta_y,
            r.delta_z,
            r.residual_norm,
            r.d_norm,
            r.d_bound,
            r.s_norm,
            r.s_bound,
            r.q1,
            r.q2,
        ]
        .into_iter()
        .map(num),
    );
    for (_, outcome) in r.certificates.iter() {
        row.push(outcome.label().to_string());
        row.push(outcome.slack().map(num).unwrap_or_default());
    }
    row
}

/// Writes the header and one row per record.
pub fn write_trace_csv<W: Write>(writer: W, trace: &[TraceRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    w.write_record(csv_header())?;
    for r in trace {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}
