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

//! Brute-force and straight-line reference computations. Nothing here calls
//! into the solver, the prox catalogue or nalgebra's decompositions.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linops::{Matrix, Vector};
use crate::oracles::Penalty;
use crate::solver::ProblemSpec;

pub const DEFAULT_GRID_STEP: f64 = 1e-5;
pub const DEFAULT_MAX_SUBSET_N: usize = 12;
const JACOBI_SWEEPS: usize = 100;
const PROX_GRADIENT_MAX_ITER: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub argmin: Vector,
    pub method: String,
    /// Grid step, enumeration size, or stopping tolerance.
    pub resolution: f64,
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric
/// matrix by cyclic Jacobi rotations.
pub fn jacobi_eigen(sym: &Matrix) -> (Vector, Matrix) {
    let n = sym.nrows();
    let mut a = sym.clone();
    let mut v = Matrix::identity(n, n);
    for _ in 0..JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Singular values (descending) from the Jacobi eigenvalues of `M^T M`.
pub fn singular_values(m: &Matrix) -> Vector {
    let (eig, _) = jacobi_eigen(&(m.transpose() * m));
    Vector::from_iterator(eig.len(), eig.iter().rev().map(|&e| e.max(0.0).sqrt()))
}

/// Central differences with step `h`.
pub fn finite_difference_gradient<F: Fn(&Vector) -> f64>(f: F, x: &Vector, h: f64) -> Vector {
    Vector::from_fn(x.len(), |i, _| {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[i] += h;
        minus[i] -= h;
        (f(&plus) - f(&minus)) / (2.0 * h)
    })
}

/// Minimizes `f(u) + w/2 (u - v)^2` over `lo + i * step` in `[lo, hi]`,
/// plus `v` and `0` when they lie in the interval.
pub fn prox_grid_oracle<F>(f_1d: F, v: f64, w: f64, lo: f64, hi: f64, step: f64) -> OracleResult
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    prox_grid_oracle_with(f_1d, v, w, lo, hi, step, Execution::Sequential)
}

pub fn prox_grid_oracle_with<F>(
    f_1d: F,
    v: f64,
    w: f64,
    lo: f64,
    hi: f64,
    step: f64,
    execution: Execution,
) -> OracleResult
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let cells = ((hi - lo) / step).floor() as usize;
    let mut anchors = Vec::new();
    for a in [v, 0.0] {
        if a >= lo && a <= hi {
            anchors.push(a);
        }
    }
    let point = |i: usize| {
        if i <= cells {
            lo + i as f64 * step
        } else {
            anchors[i - cells - 1]
        }
    };
    let objective = |u: f64| f_1d(u) + 0.5 * w * (u - v) * (u - v);
    let (best, value) = exec::argmin_range(cells + 1 + anchors.len(), execution, |i| objective(point(i)))
        .unwrap_or((0, f64::INFINITY));
    OracleResult {
        value,
        argmin: Vector::from_element(1, point(best)),
        method: "grid".into(),
        resolution: step,
    }
}

/// Grid oracle with the default step over `[-2|v| - 1, 2|v| + 1]`.
pub fn prox_grid_default<F>(f_1d: F, v: f64, w: f64) -> OracleResult
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let r = 2.0 * v.abs() + 1.0;
    prox_grid_oracle_with(f_1d, v, w, -r, r, DEFAULT_GRID_STEP, Execution::Parallel)
}

/// Gaussian elimination with partial pivoting; `None` when a pivot is
/// numerically zero.
pub fn gaussian_solve(mut a: Matrix, mut b: Vector) -> Option<Vector> {
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))?;
        if a[(pivot, col)].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap_rows(col, pivot);
        b.swap_rows(col, pivot);
        for row in (col + 1)..n {
            let factor = a[(row, col)] / a[(col, col)];
            if factor != 0.0 {
                for k in col..n {
                    a[(row, k)] -= factor * a[(col, k)];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = Vector::zeros(n);
    for row in (0..n).rev() {
        let tail: f64 = ((row + 1)..n).map(|k| a[(row, k)] * x[k]).sum();
        x[row] = (b[row] - tail) / a[(row, row)];
    }
    Some(x)
}

fn subset_fit(design: &Matrix, target: &Vector, mask: usize) -> Option<Vector> {
    let n = design.ncols();
    let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
    let mut x = Vector::zeros(n);
    if cols.is_empty() {
        return Some(x);
    }
    let k = cols.len();
    let gram = Matrix::from_fn(k, k, |i, j| design.column(cols[i]).dot(&design.column(cols[j])));
    let rhs = Vector::from_fn(k, |i, _| design.column(cols[i]).dot(target));
    let sol = gaussian_solve(gram, rhs)?;
    for (i, &j) in cols.iter().enumerate() {
        x[j] = sol[i];
    }
    Some(x)
}

fn subset_objective(design: &Matrix, target: &Vector, lambda: f64, x: &Vector) -> f64 {
    let support = x.iter().filter(|&&v| v != 0.0).count();
    0.5 * (design * x - target).norm_squared() + lambda * support as f64
}

/// Global minimizer of `1/2 |D x - b|^2 + lambda |x|_0` by enumerating all
/// `2^n` supports. Ties go to the lowest support bitmask.
pub fn best_subset_oracle(design: &Matrix, target: &Vector, lambda: f64, max_n: usize) -> Result<OracleResult> {
    best_subset_oracle_with(design, target, lambda, max_n, Execution::Parallel)
}

pub fn best_subset_oracle_with(
    design: &Matrix,
    target: &Vector,
    lambda: f64,
    max_n: usize,
    execution: Execution,
) -> Result<OracleResult> {
    let n = design.ncols();
    if n > max_n {
        return Err(Error::Scale { n, max_n });
    }
    if design.nrows() != target.len() {
        return Err(Error::Dimension {
            context: "best-subset target",
            expected: design.nrows(),
            got: target.len(),
        });
    }
    let count = 1usize << n;
    let key = |mask: usize| match subset_fit(design, target, mask) {
        Some(x) => {
            // a coefficient that lands on exactly zero belongs to a smaller support
            let full = (0..n).filter(|j| mask >> j & 1 == 1).all(|j| x[j] != 0.0);
            if full {
                subset_objective(design, target, lambda, &x)
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    };
    let (mask, value) = exec::argmin_range(count, execution, key).unwrap_or((0, f64::INFINITY));
    let argmin = subset_fit(design, target, mask).unwrap_or_else(|| Vector::zeros(n));
    Ok(OracleResult {
        value,
        argmin,
        method: "best-subset".into(),
        resolution: count as f64,
    })
}

/// Indices of the nonzero entries.
pub fn support(x: &Vector) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn inline_prox(penalty: &Penalty, v: f64, t: f64) -> Option<f64> {
    match *penalty {
        Penalty::Zero => Some(v),
        Penalty::L1 { lambda } => {
            let s = v.abs() - lambda * t;
            Some(if s > 0.0 { s * v.signum() } else { 0.0 })
        }
        Penalty::BoxIndicator { bound } => Some(v.max(-bound).min(bound)),
        Penalty::L0 { .. } | Penalty::LHalf { .. } => None,
    }
}

/// Proximal gradient on `f(x) + g(x) + h(x)` for a consensus split
/// (`A = I`, `B = -I`, `c = 0`) with convex `f` (zero, l1 or a box), step
/// `1/(L_g + L_h)`, stopped when the gradient mapping falls below `tol`.
pub fn prox_gradient_reference(problem: &ProblemSpec, tol: f64) -> Result<OracleResult> {
    let consensus = problem.a.as_scaled_identity() == Some(1.0)
        && problem.b.as_scaled_identity() == Some(-1.0)
        && problem.c.iter().all(|&c| c == 0.0);
    if !consensus {
        return Err(Error::Unsupported(
            "reference proximal gradient needs A = I, B = -I, c = 0".into(),
        ));
    }
    let penalty = problem
        .f
        .penalty()
        .filter(|p| inline_prox(p, 0.0, 1.0).is_some())
        .ok_or_else(|| Error::Unsupported(format!("nonconvex or unknown f: {}", problem.f.family())))?
        .clone();
    let lipschitz = problem.g.lipschitz() + problem.h.lipschitz();
    if !(lipschitz > 0.0) {
        return Err(Error::Unsupported("smooth part has zero curvature bound".into()));
    }
    let t = 1.0 / lipschitz;
    let n = problem.n();
    let mut x = Vector::zeros(n);
    for _ in 0..PROX_GRADIENT_MAX_ITER {
        let grad = problem.g.gradient(&x) + problem.h.gradient(&x);
        let next = Vector::from_fn(n, |i, _| inline_prox(&penalty, x[i] - t * grad[i], t).unwrap_or(f64::NAN));
        let mapping = (&x - &next).norm() / t;
        x = next;
        if mapping < tol {
            let value = problem.objective(&x, &x);
            return Ok(OracleResult {
                value,
                argmin: x,
                method: "proximal-gradient".into(),
                resolution: tol,
            });
        }
    }
    Err(Error::Convergence {
        iterations: PROX_GRADIENT_MAX_ITER,
    })
}
