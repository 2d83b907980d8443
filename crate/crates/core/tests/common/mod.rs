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

#![allow(dead_code)]

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vmpladmm::diagnostics::{check_sufficient_decrease, compute_constants, CertificateKind};
use vmpladmm::problems::{make_sparse_regression, BenchmarkInstance, LambdaSpec, PenaltyKind};
use vmpladmm::{
    LinearOperator, Matrix, MetricSchedule, Penalty, ProblemSpec, SmoothFunction, SolveOutcome, SolverConfig, Vector,
};

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

pub fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub const Q1_PER_ALPHA: f64 = 2.0;
pub const Q2: f64 = 10.0;

/// The l1 split of the convex cross-check.
pub fn lasso_instance() -> BenchmarkInstance {
    make_sparse_regression(
        20,
        30,
        5,
        0.0,
        PenaltyKind::L1,
        LambdaSpec::FractionOfMax { fraction_of_max: 0.1 },
        2,
    )
    .unwrap()
}

/// The l0 split of the exact-recovery check.
pub fn l0_instance() -> BenchmarkInstance {
    make_sparse_regression(10, 20, 3, 0.0, PenaltyKind::L0, LambdaSpec::Value(0.5), 1).unwrap()
}

/// Smallest audit-passing alpha on the doubling grid from 1, with
/// `Q1 = 2 alpha I` and `Q2 = 10 I`.
pub fn audited_config(prob: &ProblemSpec, beta: f64) -> SolverConfig {
    let base = SolverConfig {
        alpha: 1.0,
        beta,
        schedule: MetricSchedule::fixed(Q1_PER_ALPHA, Q2),
        max_iter: 50_000,
        ..SolverConfig::default()
    };
    let report = check_sufficient_decrease(&compute_constants(prob, &base).unwrap());
    let alpha = report.suggested_alpha.expect("audit grid has a passing alpha");
    SolverConfig {
        alpha,
        schedule: MetricSchedule::fixed(Q1_PER_ALPHA * alpha, Q2),
        ..base
    }
}

pub fn failures(out: &SolveOutcome, kind: CertificateKind) -> Vec<(usize, f64)> {
    out.trace
        .iter()
        .filter_map(|r| {
            let o = r.certificates.get(kind);
            o.is_fail().then(|| (r.k, o.slack().unwrap_or(f64::NAN)))
        })
        .collect()
}

pub fn consensus_problem(f: Penalty, h: Arc<dyn SmoothFunction>, n: usize) -> ProblemSpec {
    ProblemSpec::new(
        Arc::new(f),
        Arc::new(vmpladmm::oracles::ZeroSmooth::new(n)),
        h,
        LinearOperator::identity(n),
        LinearOperator::neg_identity(n),
        Vector::zeros(n),
    )
}
