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

//! Function oracles: weighted proximal maps for the nonsmooth term and
//! value/gradient oracles with Lipschitz constants for the smooth terms.

use std::fmt;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linops::{Matrix, Vector};

/// A proper, lower semicontinuous function with a computable weighted prox
///
/// `argmin_u f(u) + 1/2 sum_i w_i (u_i - v_i)^2`.
///
/// Implementors may assume `prox_unchecked` only ever sees validated
/// weights; go through [`prox`] from the outside.
pub trait ProxFunction: Send + Sync + fmt::Debug {
    /// Function value; `f64::INFINITY` outside the domain.
    fn value(&self, x: &Vector) -> f64;

    fn prox_unchecked(&self, v: &Vector, w: &Vector) -> Vector;

    fn is_separable(&self) -> bool;

    /// Tag naming the function family (the lower-semicontinuity witness).
    fn family(&self) -> &str;

    /// Declared coercivity; not machine checked.
    fn is_coercive(&self) -> bool;

    /// Parameters of a built-in penalty, if this is one.
    fn penalty(&self) -> Option<&Penalty> {
        None
    }

    /// `dist(u, ∂f(x))` for the limiting subdifferential, when known in
    /// closed form.
    fn subdifferential_distance(&self, _x: &Vector, _u: &Vector) -> Option<f64> {
        None
    }
}

/// A differentiable function with Lipschitz gradient.
pub trait SmoothFunction: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn lipschitz(&self) -> f64;
}

/// Weighted prox with argument validation.
pub fn prox(f: &dyn ProxFunction, v: &Vector, w: &Vector) -> Result<Vector> {
    check_dim("prox weights", v.len(), w.len())?;
    if let Some((index, &value)) = w.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Weight { index, value });
    }
    Ok(f.prox_unchecked(v, w))
}

pub fn smooth_eval(f: &dyn SmoothFunction, v: &Vector) -> Result<(f64, Vector)> {
    check_dim("smooth oracle input", f.dim(), v.len())?;
    Ok((f.value(v), f.gradient(v)))
}

/// The built-in separable penalties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    Zero,
    /// `lambda * |x|_1`
    L1 { lambda: f64 },
    /// `lambda * |x|_0`
    L0 { lambda: f64 },
    /// `lambda * sum_i |x_i|^{1/2}`
    LHalf { lambda: f64 },
    /// Indicator of `[-bound, bound]^n`.
    BoxIndicator { bound: f64 },
}

impl Penalty {
    pub fn lambda(&self) -> f64 {
        match self {
            Penalty::L1 { lambda } | Penalty::L0 { lambda } | Penalty::LHalf { lambda } => *lambda,
            _ => 0.0,
        }
    }

    /// Scalar prox of `t -> penalty(t)` with weight `w`.
    pub fn prox_scalar(&self, v: f64, w: f64) -> f64 {
        match *self {
            Penalty::Zero => v,
            Penalty::L1 { lambda } => soft_threshold(v, lambda / w),
            Penalty::L0 { lambda } => hard_threshold(v, lambda / w),
            Penalty::LHalf { lambda } => half_threshold(v, lambda / w),
            Penalty::BoxIndicator { bound } => v.clamp(-bound, bound),
        }
    }

    pub fn value_scalar(&self, t: f64) -> f64 {
        match *self {
            Penalty::Zero => 0.0,
            Penalty::L1 { lambda } => lambda * t.abs(),
            Penalty::L0 { lambda } => {
                if t != 0.0 {
                    lambda
                } else {
                    0.0
                }
            }
            Penalty::LHalf { lambda } => lambda * t.abs().sqrt(),
            Penalty::BoxIndicator { bound } => {
                if t.abs() <= bound {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn subdiff_distance_scalar(&self, x: f64, u: f64) -> f64 {
        match *self {
            Penalty::Zero => u.abs(),
            Penalty::L1 { lambda } => {
                if x == 0.0 {
                    (u.abs() - lambda).max(0.0)
                } else {
                    (u - lambda * x.signum()).abs()
                }
            }
            // the limiting subdifferential at 0 is the whole line
            Penalty::L0 { .. } => {
                if x == 0.0 {
                    0.0
                } else {
                    u.abs()
                }
            }
            Penalty::LHalf { lambda } => {
                if x == 0.0 {
                    0.0
                } else {
                    (u - lambda * x.signum() / (2.0 * x.abs().sqrt())).abs()
                }
            }
            Penalty::BoxIndicator { bound } => {
                if x.abs() > bound {
                    f64::INFINITY
                } else if x == bound {
                    (-u).max(0.0)
                } else if x == -bound {
                    u.max(0.0)
                } else {
                    u.abs()
                }
            }
        }
    }
}

impl ProxFunction for Penalty {
    fn value(&self, x: &Vector) -> f64 {
        x.iter().map(|&t| self.value_scalar(t)).sum()
    }

    fn prox_unchecked(&self, v: &Vector, w: &Vector) -> Vector {
        v.zip_map(w, |vi, wi| self.prox_scalar(vi, wi))
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn family(&self) -> &str {
        match self {
            Penalty::Zero => "zero",
            Penalty::L1 { .. } => "l1-norm",
            Penalty::L0 { .. } => "l0-pseudo-norm",
            Penalty::LHalf { .. } => "l-half-quasi-norm",
            Penalty::BoxIndicator { .. } => "box-indicator",
        }
    }

    fn is_coercive(&self) -> bool {
        match self {
            Penalty::L1 { lambda } | Penalty::LHalf { lambda } => *lambda > 0.0,
            Penalty::BoxIndicator { .. } => true,
            Penalty::Zero | Penalty::L0 { .. } => false,
        }
    }

    fn penalty(&self) -> Option<&Penalty> {
        Some(self)
    }

    fn subdifferential_distance(&self, x: &Vector, u: &Vector) -> Option<f64> {
        if x.len() != u.len() {
            return None;
        }
        let sq: f64 = x
            .iter()
            .zip(u.iter())
            .map(|(&xi, &ui)| self.subdiff_distance_scalar(xi, ui).powi(2))
            .sum();
        Some(sq.sqrt())
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Global minimizer of `tau |u|_0 + 1/2 (u - v)^2`. At the tie `v^2 = 2 tau`
/// both `0` and `v` are optimal; zero is returned.
pub fn hard_threshold(v: f64, tau: f64) -> f64 {
    if v * v > 2.0 * tau {
        v
    } else {
        0.0
    }
}

/// Global minimizer of `tau |u|^{1/2} + 1/2 (u - v)^2`.
///
/// The nonzero candidate is the largest root of the stationarity equation,
/// given in closed form by the trigonometric half-thresholding formula; it
/// is accepted only if it beats `u = 0` strictly.
pub fn half_threshold(v: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return v;
    }
    // the formula is stated for |u - v|^2 + mu |u|^{1/2}, so mu = 2 tau
    let mu = 2.0 * tau;
    let a = v.abs();
    if a <= 0.75 * mu.powf(2.0 / 3.0) {
        return 0.0;
    }
    let arg = ((mu / 8.0) * (a / 3.0).powf(-1.5)).min(1.0);
    let phi = arg.acos();
    let u = (2.0 / 3.0) * a * (1.0 + (2.0 * std::f64::consts::PI / 3.0 - 2.0 * phi / 3.0).cos());
    let obj_u = tau * u.sqrt() + 0.5 * (u - a).powi(2);
    let obj_0 = 0.5 * a * a;
    if obj_u < obj_0 {
        u * v.signum()
    } else {
        0.0
    }
}

/// `0` on any input.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSmooth {
    pub dim: usize,
}

impl ZeroSmooth {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl SmoothFunction for ZeroSmooth {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn gradient(&self, x: &Vector) -> Vector {
        Vector::zeros(x.len())
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
}

/// `1/2 |D y - b|^2`, with `D = I` when no design matrix is given.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    design: Option<Matrix>,
    target: Vector,
    lipschitz: f64,
}

impl LeastSquares {
    pub fn new(design: Matrix, target: Vector) -> Result<Self> {
        check_dim("least-squares target", design.nrows(), target.len())?;
        let lipschitz = max_eigenvalue(&design.tr_mul(&design)).max(0.0);
        Ok(Self {
            design: Some(design),
            target,
            lipschitz,
        })
    }

    /// `1/2 |y - b|^2`
    pub fn distance_to(target: Vector) -> Self {
        Self {
            design: None,
            target,
            lipschitz: 1.0,
        }
    }

    pub fn design(&self) -> Option<&Matrix> {
        self.design.as_ref()
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }

    fn residual(&self, y: &Vector) -> Vector {
        match &self.design {
            Some(d) => d * y - &self.target,
            None => y - &self.target,
        }
    }
}

impl SmoothFunction for LeastSquares {
    fn dim(&self) -> usize {
        self.design.as_ref().map_or(self.target.len(), |d| d.ncols())
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let r = self.residual(x);
        match &self.design {
            Some(d) => d.tr_mul(&r),
            None => r,
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// `1/2 y^T M y` for symmetric `M`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    matrix: Matrix,
    lipschitz: f64,
}

impl Quadratic {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Parameter("quadratic form needs a square matrix".into()));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let lipschitz = eig.eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        Ok(Self { matrix, lipschitz })
    }

    /// Overrides the computed constant with a declared upper bound; the
    /// eigensolver's round-off is forgiven up to `1e-10` relative.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        if lipschitz < self.lipschitz * (1.0 - 1e-10) {
            return Err(Error::Parameter(format!(
                "declared Lipschitz constant {lipschitz} is below the spectral radius {}",
                self.lipschitz
            )));
        }
        self.lipschitz = lipschitz;
        Ok(self)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

impl SmoothFunction for Quadratic {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.matrix * x))
    }
    fn gradient(&self, x: &Vector) -> Vector {
        &self.matrix * x
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

fn max_eigenvalue(sym: &Matrix) -> f64 {
    if sym.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &x| acc.max(x))
}
