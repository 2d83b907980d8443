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

//! Seeded benchmark instances with known structure.

use std::fs::File;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{read_csv_matrix, write_csv_matrix, LinearOperator, Matrix, Vector};
use crate::oracles::{LeastSquares, Penalty, Quadratic, ZeroSmooth};
use crate::solver::ProblemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    L1,
    L0,
    LHalf,
}

impl PenaltyKind {
    pub fn with_lambda(self, lambda: f64) -> Penalty {
        match self {
            PenaltyKind::L1 => Penalty::L1 { lambda },
            PenaltyKind::L0 => Penalty::L0 { lambda },
            PenaltyKind::LHalf => Penalty::LHalf { lambda },
        }
    }
}

/// Either a fixed penalty weight or a fraction of `|D^T b|_inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    FractionOfMax { fraction_of_max: f64 },
}

impl LambdaSpec {
    pub fn resolve(self, design: &Matrix, target: &Vector) -> f64 {
        match self {
            LambdaSpec::Value(v) => v,
            LambdaSpec::FractionOfMax { fraction_of_max } => {
                fraction_of_max * (design.transpose() * target).amax()
            }
        }
    }
}

/// Generator name plus parameters; enough to rebuild an instance exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum ProblemDescriptor {
    SparseRegression {
        n: usize,
        m_rows: usize,
        sparsity: usize,
        #[serde(default)]
        noise_sigma: f64,
        penalty: PenaltyKind,
        lambda: LambdaSpec,
        seed: u64,
    },
    NonconvexQp {
        n: usize,
        negative_curvature: f64,
        #[serde(rename = "box")]
        box_bound: f64,
        seed: u64,
    },
    ConsensusToy {
        target: Vec<f64>,
    },
}

impl ProblemDescriptor {
    pub fn build(&self) -> Result<BenchmarkInstance> {
        match *self {
            ProblemDescriptor::SparseRegression {
                n,
                m_rows,
                sparsity,
                noise_sigma,
                penalty,
                lambda,
                seed,
            } => make_sparse_regression(n, m_rows, sparsity, noise_sigma, penalty, lambda, seed),
            ProblemDescriptor::NonconvexQp {
                n,
                negative_curvature,
                box_bound,
                seed,
            } => make_nonconvex_qp(n, negative_curvature, box_bound, seed),
            ProblemDescriptor::ConsensusToy { ref target } => {
                consensus_toy(Vector::from_column_slice(target))
            }
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            ProblemDescriptor::SparseRegression { seed, .. }
            | ProblemDescriptor::NonconvexQp { seed, .. } => seed,
            ProblemDescriptor::ConsensusToy { .. } => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub x: Vector,
    pub y: Vector,
    pub objective: f64,
}

/// Raw data an instance was assembled from.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceData {
    SparseRegression {
        design: Matrix,
        target: Vector,
        x_true: Vector,
        penalty: Penalty,
    },
    NonconvexQp {
        matrix: Matrix,
        box_bound: f64,
        lipschitz: f64,
    },
    ConsensusToy {
        target: Vector,
    },
}

#[derive(Clone, Debug)]
pub struct BenchmarkInstance {
    pub problem: ProblemSpec,
    pub ground_truth: Option<GroundTruth>,
    pub seed: u64,
    pub descriptor: ProblemDescriptor,
    pub data: InstanceData,
}

fn consensus_split(n: usize) -> (LinearOperator, LinearOperator, Vector) {
    (
        LinearOperator::identity(n),
        LinearOperator::neg_identity(n),
        Vector::zeros(n),
    )
}

/// `lambda * penalty(x) + 1/2 |D y - b|^2` with `x = y`.
pub fn sparse_regression_problem(design: Matrix, target: Vector, penalty: Penalty) -> Result<ProblemSpec> {
    let n = design.ncols();
    let (a, b, c) = consensus_split(n);
    Ok(ProblemSpec::new(
        Arc::new(penalty),
        Arc::new(ZeroSmooth::new(n)),
        Arc::new(LeastSquares::new(design, target)?),
        a,
        b,
        c,
    ))
}

/// Box indicator on `x`, `1/2 y^T M y` on `y`, `x = y`.
pub fn nonconvex_qp_problem(matrix: Matrix, box_bound: f64, lipschitz: f64) -> Result<ProblemSpec> {
    if !(box_bound > 0.0) {
        return Err(Error::Parameter(format!("box must be > 0, got {box_bound}")));
    }
    let n = matrix.nrows();
    let (a, b, c) = consensus_split(n);
    Ok(ProblemSpec::new(
        Arc::new(Penalty::BoxIndicator { bound: box_bound }),
        Arc::new(ZeroSmooth::new(n)),
        Arc::new(Quadratic::new(matrix)?.with_lipschitz(lipschitz)?),
        a,
        b,
        c,
    ))
}

pub fn sparse_regression_from_data(
    design: Matrix,
    target: Vector,
    penalty: PenaltyKind,
    lambda: f64,
) -> Result<BenchmarkInstance> {
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!("lambda must be > 0, got {lambda}")));
    }
    let n = design.ncols();
    let kind = penalty;
    let penalty = penalty.with_lambda(lambda);
    let problem = sparse_regression_problem(design.clone(), target.clone(), penalty.clone())?;
    Ok(BenchmarkInstance {
        problem,
        ground_truth: None,
        seed: 0,
        descriptor: ProblemDescriptor::SparseRegression {
            n,
            m_rows: design.nrows(),
            sparsity: n,
            noise_sigma: 0.0,
            penalty: kind,
            lambda: LambdaSpec::Value(lambda),
            seed: 0,
        },
        data: InstanceData::SparseRegression {
            design,
            target,
            x_true: Vector::zeros(n),
            penalty,
        },
    })
}

/// Gaussian `m_rows x n` design, planted `sparsity`-sparse signal with
/// magnitudes in `[1, 2]` and random signs, Gaussian noise.
pub fn make_sparse_regression(
    n: usize,
    m_rows: usize,
    sparsity: usize,
    noise_sigma: f64,
    penalty: PenaltyKind,
    lambda: LambdaSpec,
    seed: u64,
) -> Result<BenchmarkInstance> {
    if n == 0 || m_rows == 0 {
        return Err(Error::Parameter("n and m_rows must be positive".into()));
    }
    if sparsity > n {
        return Err(Error::Parameter(format!("sparsity {sparsity} exceeds n = {n}")));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::Parameter(format!("noise_sigma must be >= 0, got {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let design = Matrix::from_fn(m_rows, n, |_, _| rng.sample(StandardNormal));
    let mut x_true = Vector::zeros(n);
    let mut support = sample(&mut rng, n, sparsity).into_vec();
    support.sort_unstable();
    for j in support {
        let magnitude: f64 = rng.random_range(1.0..=2.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        x_true[j] = sign * magnitude;
    }
    let noise = Vector::from_fn(m_rows, |_, _| noise_sigma * rng.sample::<f64, _>(StandardNormal));
    let target = &design * &x_true + noise;

    let lambda_value = lambda.resolve(&design, &target);
    if !(lambda_value > 0.0) {
        return Err(Error::Parameter(format!("lambda must be > 0, got {lambda_value}")));
    }
    let penalty_fn = penalty.with_lambda(lambda_value);
    let problem = sparse_regression_problem(design.clone(), target.clone(), penalty_fn.clone())?;
    let objective = problem.objective(&x_true, &x_true);
    Ok(BenchmarkInstance {
        problem,
        ground_truth: Some(GroundTruth {
            x: x_true.clone(),
            y: x_true.clone(),
            objective,
        }),
        seed,
        descriptor: ProblemDescriptor::SparseRegression {
            n,
            m_rows,
            sparsity,
            noise_sigma,
            penalty,
            lambda,
            seed,
        },
        data: InstanceData::SparseRegression {
            design,
            target,
            x_true,
            penalty: penalty_fn,
        },
    })
}

/// Random orthogonal `n x n` matrix (Q factor of a Gaussian matrix, signs
/// fixed by the diagonal of R).
pub(crate) fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `M = U diag(e) U^T` with `e` in `[-negative_curvature, 1]`; both
/// endpoints are attained when `n >= 2`.
pub fn make_nonconvex_qp(n: usize, negative_curvature: f64, box_bound: f64, seed: u64) -> Result<BenchmarkInstance> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    if !(negative_curvature >= 0.0 && negative_curvature.is_finite()) {
        return Err(Error::Parameter(format!(
            "negative_curvature must be >= 0, got {negative_curvature}"
        )));
    }
    if !(box_bound > 0.0) {
        return Err(Error::Parameter(format!("box must be > 0, got {box_bound}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_orthogonal(n, &mut rng);
    let mut eig = Vector::from_fn(n, |_, _| rng.random_range(-negative_curvature..=1.0));
    eig[0] = 1.0;
    if n >= 2 {
        eig[1] = -negative_curvature;
    }
    let mut matrix = &u * Matrix::from_diagonal(&eig) * u.transpose();
    matrix = (&matrix + matrix.transpose()) * 0.5;
    let lipschitz = negative_curvature.max(1.0);
    let problem = nonconvex_qp_problem(matrix.clone(), box_bound, lipschitz)?;
    // with no negative curvature the origin is a minimizer; it is unique only
    // when every sampled eigenvalue is positive
    let ground_truth = (negative_curvature == 0.0).then(|| GroundTruth {
        x: Vector::zeros(n),
        y: Vector::zeros(n),
        objective: 0.0,
    });
    Ok(BenchmarkInstance {
        problem,
        ground_truth,
        seed,
        descriptor: ProblemDescriptor::NonconvexQp {
            n,
            negative_curvature,
            box_bound,
            seed,
        },
        data: InstanceData::NonconvexQp {
            matrix,
            box_bound,
            lipschitz,
        },
    })
}

/// `f = 0`, `g = 0`, `h(y) = 1/2 |y - b|^2`, `x = y`; unique stationary
/// point `x = y = b`, `z = 0`.
pub fn consensus_toy(target: Vector) -> Result<BenchmarkInstance> {
    let n = target.len();
    if n == 0 {
        return Err(Error::Parameter("target must be nonempty".into()));
    }
    let (a, b, c) = consensus_split(n);
    let problem = ProblemSpec::new(
        Arc::new(Penalty::Zero),
        Arc::new(ZeroSmooth::new(n)),
        Arc::new(LeastSquares::distance_to(target.clone())),
        a,
        b,
        c,
    );
    Ok(BenchmarkInstance {
        problem,
        ground_truth: Some(GroundTruth {
            x: target.clone(),
            y: target.clone(),
            objective: 0.0,
        }),
        seed: 0,
        descriptor: ProblemDescriptor::ConsensusToy {
            target: target.iter().copied().collect(),
        },
        data: InstanceData::ConsensusToy { target },
    })
}

const DESCRIPTOR_FILE: &str = "instance.json";

fn column(v: &Vector) -> Matrix {
    Matrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn read_column(path: &Path) -> Result<Vector> {
    let m = read_csv_matrix(File::open(path)?)?;
    if m.ncols() != 1 {
        return Err(Error::Config(format!(
            "{} must hold a single column, found {}",
            path.display(),
            m.ncols()
        )));
    }
    Ok(m.column(0).into_owned())
}

/// Writes `instance.json` and the CSV matrices of `instance` into `dir`.
pub fn write_replay(instance: &BenchmarkInstance, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    serde_json::to_writer_pretty(File::create(dir.join(DESCRIPTOR_FILE))?, &instance.descriptor)?;
    let write = |name: &str, m: &Matrix| write_csv_matrix(File::create(dir.join(name))?, m);
    match &instance.data {
        InstanceData::SparseRegression {
            design,
            target,
            x_true,
            ..
        } => {
            write("design.csv", design)?;
            write("target.csv", &column(target))?;
            write("x_true.csv", &column(x_true))?;
        }
        InstanceData::NonconvexQp { matrix, .. } => write("matrix.csv", matrix)?,
        InstanceData::ConsensusToy { target } => write("target.csv", &column(target))?,
    }
    Ok(())
}

/// Rebuilds an instance from the files of [`write_replay`] without
/// re-running the generator.
pub fn read_replay(dir: &Path) -> Result<BenchmarkInstance> {
    let descriptor: ProblemDescriptor =
        serde_json::from_reader(File::open(dir.join(DESCRIPTOR_FILE))?)?;
    match descriptor {
        ProblemDescriptor::SparseRegression {
            penalty,
            lambda,
            seed,
            ..
        } => {
            let design = read_csv_matrix(File::open(dir.join("design.csv"))?)?;
            let target = read_column(&dir.join("target.csv"))?;
            let x_true = read_column(&dir.join("x_true.csv"))?;
            let penalty_fn = penalty.with_lambda(lambda.resolve(&design, &target));
            let problem = sparse_regression_problem(design.clone(), target.clone(), penalty_fn.clone())?;
            let objective = problem.objective(&x_true, &x_true);
            Ok(BenchmarkInstance {
                problem,
                ground_truth: Some(GroundTruth {
                    x: x_true.clone(),
                    y: x_true.clone(),
                    objective,
                }),
                seed,
                descriptor,
                data: InstanceData::SparseRegression {
                    design,
                    target,
                    x_true,
                    penalty: penalty_fn,
                },
            })
        }
        ProblemDescriptor::NonconvexQp {
            negative_curvature,
            box_bound,
            seed,
            ..
        } => {
            let matrix = read_csv_matrix(File::open(dir.join("matrix.csv"))?)?;
            let lipschitz = negative_curvature.max(1.0);
            let n = matrix.nrows();
            Ok(BenchmarkInstance {
                problem: nonconvex_qp_problem(matrix.clone(), box_bound, lipschitz)?,
                ground_truth: (negative_curvature == 0.0).then(|| GroundTruth {
                    x: Vector::zeros(n),
                    y: Vector::zeros(n),
                    objective: 0.0,
                }),
                seed,
                descriptor,
                data: InstanceData::NonconvexQp {
                    matrix,
                    box_bound,
                    lipschitz,
                },
            })
        }
        ProblemDescriptor::ConsensusToy { .. } => {
            consensus_toy(read_column(&dir.join("target.csv"))?)
        }
    }
}
