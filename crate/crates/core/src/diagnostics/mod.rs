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

//! Runtime evaluation of the quantities the convergence theory is stated in.

pub mod constants;
pub mod rate;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linops::Vector;
use crate::oracles::prox;
use crate::solver::{x_linear_term, DiagonalMetric, IterateState, ProblemSpec, SolverConfig};

pub use constants::{
    check_sufficient_decrease, compute_constants, constants_from_spectrum, AuditReport,
    ConstantInputs, TheoryConstants,
};
pub use rate::{fit_kl_rate, lyapunov_gaps, RateFit, RateParams, Regime};
pub use trace::{write_trace_csv, CertificateKind, Certificates, Outcome, TraceRecord};

/// Relative tolerance of every certificate.
pub const CERT_RTOL: f64 = 1e-8;
/// Relative tolerance of the surrogate-decrease check.
pub const SURROGATE_RTOL: f64 = 1e-10;

fn tol(scale: f64) -> f64 {
    if scale.is_finite() {
        CERT_RTOL * (1.0 + scale.abs())
    } else {
        CERT_RTOL
    }
}

/// `f(x) + g(x) + h(y) + <z, r> + alpha/2 |r|^2` with `r = A x + B y + c`.
pub fn aug_lagrangian(prob: &ProblemSpec, alpha: f64, x: &Vector, y: &Vector, z: &Vector) -> Result<f64> {
    check_dim("multiplier", prob.p(), z.len())?;
    let r = prob.residual(x, y)?;
    Ok(prob.objective(x, y) + z.dot(&r) + 0.5 * alpha * r.norm_squared())
}

/// Augmented Lagrangian plus `r gamma0 |B*(z - z_prev)|^2 + r theta0 |y - y_prev|^2`.
pub fn reg_lagrangian_with(prob: &ProblemSpec, consts: &TheoryConstants, state: &IterateState) -> Result<f64> {
    let i = &consts.inputs;
    let lag = aug_lagrangian(prob, i.alpha, &state.x, &state.y, &state.z)?;
    let bdz = prob.b.adjoint(&(&state.z - &state.z_prev))?;
    let dy = &state.y - &state.y_prev;
    Ok(lag + i.r * consts.gamma0 * bdz.norm_squared() + i.r * consts.theta0 * dy.norm_squared())
}

pub fn reg_lagrangian(prob: &ProblemSpec, cfg: &SolverConfig, state: &IterateState) -> Result<f64> {
    reg_lagrangian_with(prob, &compute_constants(prob, cfg)?, state)
}

/// An element of the limiting subdifferential of the augmented Lagrangian at
/// the new iterate, with its norm and the bound `rho * sum of step norms`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgradientWitness {
    pub dx: Vector,
    pub dy: Vector,
    pub dz: Vector,
    pub d_norm: f64,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepNorms {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl StepNorms {
    pub fn between(prev: &IterateState, cur: &IterateState) -> Self {
        Self {
            dx: (&cur.x - &prev.x).norm(),
            dy: (&cur.y - &prev.y).norm(),
            dz: (&cur.z - &prev.z).norm(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.dx + self.dy + self.dz
    }

    pub fn sq_sum(&self) -> f64 {
        self.dx.powi(2) + self.dy.powi(2) + self.dz.powi(2)
    }
}

fn check_fresh(
    prev: &IterateState,
    cur: &IterateState,
    q1: &DiagonalMetric,
    q2: &DiagonalMetric,
) -> Result<()> {
    let fresh = cur.k == prev.k + 1
        && matches!(&cur.metrics, Some((m1, m2)) if m1 == q1 && m2 == q2);
    if fresh {
        Ok(())
    } else {
        Err(Error::StaleMetric { iteration: cur.k })
    }
}

/// The subgradient element built from the optimality conditions of the step
/// `prev -> cur`:
///
/// ```text
/// d_x = grad g(x+) - grad g(x) + A* dz + alpha A*(A dx + B dy) - Q1 dx
/// d_y = grad h(y+) - grad h(y) + B* dz - Q2 dy
/// d_z = dz / (alpha beta)
/// ```
pub fn subgradient_witness(
    prev: &IterateState,
    cur: &IterateState,
    prob: &ProblemSpec,
    consts: &TheoryConstants,
    q1: &DiagonalMetric,
    q2: &DiagonalMetric,
) -> Result<SubgradientWitness> {
    check_fresh(prev, cur, q1, q2)?;
    let (alpha, beta) = (consts.inputs.alpha, consts.inputs.beta);
    let dx = &cur.x - &prev.x;
    let dy = &cur.y - &prev.y;
    let dz = &cur.z - &prev.z;
    let dres = prob.a.forward(&dx)? + prob.b.forward(&dy)?;
    let wx = prob.g.gradient(&cur.x) - prob.g.gradient(&prev.x) + prob.a.adjoint(&dz)?
        + prob.a.adjoint(&dres)? * alpha
        - q1.apply(&dx);
    let wy = prob.h.gradient(&cur.y) - prob.h.gradient(&prev.y) + prob.b.adjoint(&dz)? - q2.apply(&dy);
    let wz = &dz / (alpha * beta);
    let d_norm = (wx.norm_squared() + wy.norm_squared() + wz.norm_squared()).sqrt();
    let bound = consts.rho * (dx.norm() + dy.norm() + dz.norm());
    Ok(SubgradientWitness {
        dx: wx,
        dy: wy,
        dz: wz,
        d_norm,
        bound,
    })
}

/// Norm of the matching subgradient of the regularized Lagrangian in
/// `(x, y, z, y_prev, z_prev)` and its bound `rho_tilde * sum of step norms`.
pub fn reg_subgradient(
    prev: &IterateState,
    cur: &IterateState,
    prob: &ProblemSpec,
    consts: &TheoryConstants,
    witness: &SubgradientWitness,
) -> Result<(f64, f64)> {
    let r = consts.inputs.r;
    let dy = &cur.y - &prev.y;
    let dz = &cur.z - &prev.z;
    let cy = &dy * (2.0 * r * consts.theta0);
    let cz = prob.b.forward(&prob.b.adjoint(&dz)?)? * (2.0 * r * consts.gamma0);
    let s_sq = witness.dx.norm_squared()
        + (&witness.dy + &cy).norm_squared()
        + (&witness.dz + &cz).norm_squared()
        + cy.norm_squared()
        + cz.norm_squared();
    let bound = consts.rho_tilde * (dy.norm() + dz.norm() + (&cur.x - &prev.x).norm());
    Ok((s_sq.sqrt(), bound))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityResidual {
    pub r_x: f64,
    pub r_y: f64,
    pub r_z: f64,
}

impl StationarityResidual {
    pub fn max(&self) -> f64 {
        self.r_x.max(self.r_y).max(self.r_z)
    }
}

/// Distances of `(x, y, z)` from the three critical-point conditions.
///
/// `r_x` is `dist(-grad g(x) - A* z, ∂f(x))` when `f` knows its limiting
/// subdifferential, otherwise `|x - prox_f(x - grad g(x) - A* z)|`.
pub fn stationarity_residual(prob: &ProblemSpec, x: &Vector, y: &Vector, z: &Vector) -> Result<StationarityResidual> {
    check_dim("multiplier", prob.p(), z.len())?;
    let u = -(prob.g.gradient(x) + prob.a.adjoint(z)?);
    let r_x = match prob.f.subdifferential_distance(x, &u) {
        Some(d) => d,
        None => {
            let w = Vector::from_element(x.len(), 1.0);
            (x - prox(prob.f.as_ref(), &(x + &u), &w)?).norm()
        }
    };
    let r_y = (prob.h.gradient(y) + prob.b.adjoint(z)?).norm();
    let r_z = prob.residual(x, y)?.norm();
    Ok(StationarityResidual { r_x, r_y, r_z })
}

/// Evaluates every certificate for the step `prev -> cur` and assembles the
/// trace row of `cur`.
pub fn assess_step(
    prob: &ProblemSpec,
    consts: &TheoryConstants,
    audit_passed: bool,
    prev: &IterateState,
    cur: &IterateState,
) -> Result<TraceRecord> {
    let (q1, q2) = cur
        .metrics
        .clone()
        .ok_or(Error::StaleMetric { iteration: cur.k })?;
    let i = &consts.inputs;
    let (alpha, beta) = (i.alpha, i.beta);
    let ab = alpha * beta;
    let dx = &cur.x - &prev.x;
    let dy = &cur.y - &prev.y;
    let dz = &cur.z - &prev.z;
    let norms = StepNorms::between(prev, cur);

    let lag = |x: &Vector, y: &Vector, z: &Vector| aug_lagrangian(prob, alpha, x, y, z);
    let l_prev = lag(&prev.x, &prev.y, &prev.z)?;
    let l_x = lag(&cur.x, &prev.y, &prev.z)?;
    let l_xy = lag(&cur.x, &cur.y, &prev.z)?;
    let l_cur = lag(&cur.x, &cur.y, &cur.z)?;

    let mut certs = Certificates::default();

    let p = x_linear_term(prev, prob, alpha)?;
    let f_prev = prob.f.value(&prev.x);
    let lin = p.dot(&dx);
    let surrogate = prob.f.value(&cur.x) + lin + 0.5 * q1.norm_squared(&dx);
    let stol = SURROGATE_RTOL * (1.0 + if f_prev.is_finite() { f_prev.abs() } else { 0.0 } + lin.abs());
    certs.set(CertificateKind::XSurrogate, Outcome::check(surrogate, f_prev, stol));

    let cx = 0.5 * q1.norm_squared(&dx)
        - 0.5 * alpha * prob.a.forward(&dx)?.norm_squared()
        - 0.5 * i.lipschitz_g * norms.dx.powi(2);
    let cy = 0.5 * q2.norm_squared(&dy) + 0.5 * alpha * prob.b.forward(&dy)?.norm_squared()
        - 0.5 * i.lipschitz_h * norms.dy.powi(2);
    certs.set(CertificateKind::DescentX, Outcome::check(l_x + cx, l_prev, tol(l_prev)));
    certs.set(CertificateKind::DescentY, Outcome::check(l_xy + cy, l_x, tol(l_x)));
    certs.set(
        CertificateKind::LagrangianDescent,
        Outcome::check(l_cur + cx + cy, l_prev + norms.dz.powi(2) / ab, tol(l_prev)),
    );

    let reg_cur = reg_lagrangian_with(prob, consts, cur)?;
    if prev.metrics.is_some() {
        let bdz = prob.b.adjoint(&dz)?.norm_squared();
        let bdz_prev = prob.b.adjoint(&(&prev.z - &prev.z_prev))?.norm_squared();
        let dy_prev = (&prev.y - &prev.y_prev).norm_squared();
        let lhs = norms.dz.powi(2) / ab + consts.gamma0 * bdz;
        let rhs = consts.theta0 * (dy_prev + norms.dy.powi(2)) + consts.gamma0 * bdz_prev;
        certs.set(CertificateKind::DualBound, Outcome::check(lhs, rhs, tol(rhs)));
        if audit_passed {
            let reg_prev = reg_lagrangian_with(prob, consts, prev)?;
            certs.set(
                CertificateKind::SufficientDecrease,
                Outcome::check(reg_cur + consts.sigma * norms.sq_sum(), reg_prev, tol(reg_prev)),
            );
        }
    }

    let witness = subgradient_witness(prev, cur, prob, consts, &q1, &q2)?;
    certs.set(
        CertificateKind::SubgradientBound,
        Outcome::check(witness.d_norm, witness.bound, tol(witness.bound)),
    );
    let (s_norm, s_bound) = reg_subgradient(prev, cur, prob, consts, &witness)?;
    certs.set(
        CertificateKind::RegSubgradientBound,
        Outcome::check(s_norm, s_bound, tol(s_bound)),
    );

    Ok(TraceRecord {
        k: cur.k,
        lagrangian: l_cur,
        reg_lagrangian: reg_cur,
        objective: prob.objective(&cur.x, &cur.y),
        delta_x: norms.dx,
        delta_y: norms.dy,
        delta_z: norms.dz,
        residual_norm: cur.residual.norm(),
        d_norm: witness.d_norm,
        d_bound: witness.bound,
        s_norm,
        s_bound,
        q1: q1.max(),
        q2: q2.max(),
        certificates: certs,
    })
}
