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

//! Theory constants and the sufficient-decrease audit.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::solver::{ProblemSpec, ProblemSpectrum, SolverConfig};

/// Number of doublings tried when the audit looks for a passing `alpha`.
pub const AUDIT_DOUBLINGS: u32 = 16;

/// Every input symbol of the constant formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantInputs {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub lipschitz_g: f64,
    pub lipschitz_h: f64,
    pub q1_inf: f64,
    pub q1_sup: f64,
    pub q2_inf: f64,
    pub q2_sup: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub lam_min_ata: f64,
    pub lam_min_btb: f64,
    pub lam_min_bbt: f64,
}

impl ConstantInputs {
    pub fn new(spectrum: &ProblemSpectrum, cfg: &SolverConfig) -> Self {
        let b = cfg.schedule.bounds();
        Self {
            alpha: cfg.alpha,
            beta: cfg.beta,
            r: cfg.r,
            lipschitz_g: spectrum.lipschitz_g,
            lipschitz_h: spectrum.lipschitz_h,
            q1_inf: b.q1_inf,
            q1_sup: b.q1_sup,
            q2_inf: b.q2_inf,
            q2_sup: b.q2_sup,
            norm_a: spectrum.norm_a,
            norm_b: spectrum.norm_b,
            lam_min_ata: spectrum.lam_min_ata,
            lam_min_btb: spectrum.lam_min_btb,
            lam_min_bbt: spectrum.lam_min_bbt,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub inputs: ConstantInputs,
    pub theta0: f64,
    pub gamma0: f64,
    pub theta1: f64,
    pub rho: f64,
    pub rho_tilde: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma: f64,
}

impl TheoryConstants {
    /// Straight evaluation of the formulas; no validation.
    pub fn evaluate(inputs: ConstantInputs) -> Self {
        let ConstantInputs {
            alpha,
            beta,
            r,
            lipschitz_g: lg,
            lipschitz_h: lh,
            q1_inf,
            q1_sup,
            q2_inf,
            q2_sup,
            norm_a,
            norm_b,
            lam_min_ata,
            lam_min_btb,
            lam_min_bbt,
        } = inputs;
        let dev = (1.0 - beta).abs();
        let denom = alpha * beta * lam_min_bbt * (1.0 - dev);
        let theta0 = 2.0 * beta * (lh + q2_sup).powi(2) / denom;
        let gamma0 = dev / denom;
        let theta1 = 2.0 * beta * q2_sup.powi(2) / denom;
        let rho = (q1_sup + lg)
            .max(alpha * norm_a * norm_b + lh + q2_sup)
            .max(norm_a + norm_b + 1.0 / (alpha * beta));
        let rho_tilde = 3f64.sqrt() * rho + 4.0 * r * theta0.max(gamma0);
        let sigma1 = q1_inf + alpha * lam_min_ata - lg;
        let sigma2 = q2_inf + alpha * lam_min_btb - (lh + theta0 + theta1);
        let sigma = sigma1.min(sigma2).min((r - 1.0) / (alpha * beta));
        Self {
            inputs,
            theta0,
            gamma0,
            theta1,
            rho,
            rho_tilde,
            sigma1,
            sigma2,
            sigma,
        }
    }
}

/// Checks the beta guard, then evaluates the constants for `prob` under `cfg`.
pub fn compute_constants(prob: &ProblemSpec, cfg: &SolverConfig) -> Result<TheoryConstants> {
    cfg.check_beta()?;
    constants_from_spectrum(&prob.spectrum()?, cfg)
}

pub fn constants_from_spectrum(
    spectrum: &ProblemSpectrum,
    cfg: &SolverConfig,
) -> Result<TheoryConstants> {
    cfg.check_beta()?;
    Ok(TheoryConstants::evaluate(ConstantInputs::new(spectrum, cfg)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma: f64,
    pub sigma1_pass: bool,
    pub sigma2_pass: bool,
    pub sigma_pass: bool,
    pub passed: bool,
    /// `L_g = 0`, so the first condition holds for every `alpha`.
    pub sigma1_unconditional: bool,
    /// Smallest `alpha * 2^j`, `j = 0..=16`, whose constants pass.
    pub suggested_alpha: Option<f64>,
    pub note: String,
}

fn passes(c: &TheoryConstants) -> bool {
    c.sigma1 > 0.0 && c.sigma2 > 0.0 && c.sigma > 0.0
}

/// Sufficient-decrease audit. The metric lower bounds enter as the
/// minimum eigenvalues `q_inf`.
pub fn check_sufficient_decrease(consts: &TheoryConstants) -> AuditReport {
    let passed = passes(consts);
    let base = consts.inputs.alpha;
    let suggested_alpha = (0..=AUDIT_DOUBLINGS)
        .map(|j| base * f64::from(2u32.pow(j)))
        .find(|&a| passes(&TheoryConstants::evaluate(consts.inputs.with_alpha(a))));
    AuditReport {
        sigma1: consts.sigma1,
        sigma2: consts.sigma2,
        sigma: consts.sigma,
        sigma1_pass: consts.sigma1 > 0.0,
        sigma2_pass: consts.sigma2 > 0.0,
        sigma_pass: consts.sigma > 0.0,
        passed,
        sigma1_unconditional: consts.inputs.lipschitz_g == 0.0,
        suggested_alpha,
        note: "metric lower bounds are read as minimum eigenvalues q_inf".into(),
    }
}
