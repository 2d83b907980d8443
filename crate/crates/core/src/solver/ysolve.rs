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

//! Solver for the y-subproblem system `(alpha B*B + Q2) y = rhs`.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linops::{LinearOperator, Matrix, Vector};
use crate::solver::schedule::DiagonalMetric;

const CG_TOL: f64 = 1e-10;
const OPTIMALITY_TOL: f64 = 1e-8;

enum Factor {
    /// `B = s I`, so the system matrix is diagonal.
    Diagonal(Vector),
    Cholesky(Cholesky<f64, nalgebra::Dyn>),
    /// Matrix-free `B`; nothing to factor.
    Iterative,
}

/// Caches the factorization of `alpha B*B + Q2` while `alpha` and `Q2`
/// stay unchanged.
pub struct YSystemSolver {
    key: Option<(f64, DiagonalMetric)>,
    factor: Option<Factor>,
    refactorizations: usize,
}

impl Default for YSystemSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl YSystemSolver {
    pub fn new() -> Self {
        Self {
            key: None,
            factor: None,
            refactorizations: 0,
        }
    }

    /// Number of times the system had to be (re)built.
    pub fn refactorizations(&self) -> usize {
        self.refactorizations
    }

    fn prepare(&mut self, b: &LinearOperator, alpha: f64, q2: &DiagonalMetric) -> Result<()> {
        if let Some((a, q)) = &self.key {
            if *a == alpha && q == q2 {
                return Ok(());
            }
        }
        let m = b.cols();
        let q2w = q2.weights(m);
        let factor = if let LinearOperator::ScaledIdentity { scale, .. } = b {
            let diag = q2w.map(|q| alpha * scale * scale + q);
            if diag.iter().any(|&d| !(d > 0.0)) {
                return Err(Error::LinearSolve("y-system has a nonpositive pivot".into()));
            }
            Factor::Diagonal(diag)
        } else if let Some(dense) = b.to_dense() {
            let mut k: Matrix = dense.tr_mul(&dense) * alpha;
            for i in 0..m {
                k[(i, i)] += q2w[i];
            }
            let chol = Cholesky::new(k).ok_or_else(|| {
                Error::LinearSolve("alpha B*B + Q2 is not positive definite".into())
            })?;
            Factor::Cholesky(chol)
        } else {
            Factor::Iterative
        };
        self.factor = Some(factor);
        self.key = Some((alpha, q2.clone()));
        self.refactorizations += 1;
        Ok(())
    }

    fn apply_system(b: &LinearOperator, alpha: f64, q2: &DiagonalMetric, y: &Vector) -> Result<Vector> {
        let bty = b.adjoint(&b.forward(y)?)?;
        Ok(bty * alpha + q2.apply(y))
    }

    /// Solves the system and checks the optimality residual
    /// `|K y - rhs| <= 1e-8 (1 + |rhs|)`.
    pub fn solve(
        &mut self,
        b: &LinearOperator,
        alpha: f64,
        q2: &DiagonalMetric,
        rhs: &Vector,
    ) -> Result<Vector> {
        self.prepare(b, alpha, q2)?;
        let y = match self.factor.as_ref().expect("prepared above") {
            Factor::Diagonal(d) => rhs.component_div(d),
            Factor::Cholesky(chol) => chol.solve(rhs),
            Factor::Iterative => conjugate_gradient(
                |v| Self::apply_system(b, alpha, q2, v),
                rhs,
                CG_TOL,
                10 * rhs.len().max(10),
            )?,
        };
        let residual = (Self::apply_system(b, alpha, q2, &y)? - rhs).norm();
        if !(residual <= OPTIMALITY_TOL * (1.0 + rhs.norm())) {
            return Err(Error::LinearSolve(format!(
                "y-step optimality residual {residual:e} exceeds tolerance"
            )));
        }
        Ok(y)
    }
}

/// Plain CG for an SPD operator, started at zero. Stops on relative
/// residual `tol`.
pub fn conjugate_gradient<F>(apply: F, rhs: &Vector, tol: f64, max_iter: usize) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let mut x = Vector::zeros(rhs.len());
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rs = r.norm_squared();
    let target = tol * tol * rhs.norm_squared();
    if rs <= target {
        return Ok(x);
    }
    for _ in 0..max_iter {
        let ap = apply(&p)?;
        let curvature = p.dot(&ap);
        if !(curvature > 0.0) {
            return Err(Error::LinearSolve("system operator is not positive definite".into()));
        }
        let step = rs / curvature;
        x.axpy(step, &p, 1.0);
        r.axpy(-step, &ap, 1.0);
        let rs_new = r.norm_squared();
        if rs_new <= target {
            return Ok(x);
        }
        p = &r + &p * (rs_new / rs);
        rs = rs_new;
    }
    Err(Error::LinearSolve(format!(
        "conjugate gradient did not reach tolerance in {max_iter} iterations"
    )))
}
