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

//! Empirical Kurdyka-Lojasiewicz exponent from an error sequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 10;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// Relative floor below which a Lyapunov gap is treated as round-off.
pub const GAP_NOISE_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Exponent 0: the sequence hits zero.
    Finite,
    /// Exponent in (0, 1/2]: geometric decay.
    Linear,
    /// Exponent in (1/2, 1): power-law decay.
    Sublinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub theta_hat: f64,
    pub regime: Regime,
    /// Coefficient of determination of the chosen regression.
    pub fit_quality: f64,
    pub params: RateParams,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// `E_{k+1} / E_k` of the geometric fit.
    pub ratio: Option<f64>,
    /// `p` in `E_k ~ C k^{-p}`.
    pub power: Option<f64>,
    /// 1-based index of the first exact zero.
    pub first_zero: Option<usize>,
    pub linear_r2: Option<f64>,
    pub sublinear_r2: Option<f64>,
    pub points: usize,
}

struct LineFit {
    slope: f64,
    r2: f64,
}

fn least_squares_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit { slope, r2 }
}

/// Exponent implied by `E_k ~ k^{-p}`: `p = 1/(2 theta - 1)`.
pub fn theta_from_power(p: f64) -> f64 {
    if p > 0.0 {
        ((p + 1.0) / (2.0 * p)).clamp(0.5, 1.0 - f64::EPSILON)
    } else {
        1.0 - f64::EPSILON
    }
}

/// Fits the tail of `errors` (index `i` is iteration `k = i + 1`).
pub fn fit_kl_rate(errors: &[f64], tail_fraction: f64) -> Result<RateFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    if errors.len() < MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_POINTS,
            got: errors.len(),
        });
    }
    if errors.last() == Some(&0.0) {
        let first_zero = errors
            .iter()
            .rposition(|&e| e != 0.0)
            .map_or(0, |i| i + 1);
        return Ok(RateFit {
            theta_hat: 0.0,
            regime: Regime::Finite,
            fit_quality: 1.0,
            params: RateParams {
                first_zero: Some(first_zero + 1),
                points: errors.len(),
                ..RateParams::default()
            },
        });
    }

    let start = ((errors.len() as f64) * (1.0 - tail_fraction)).floor() as usize;
    let (ks, logs): (Vec<f64>, Vec<f64>) = errors
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(i, &e)| ((i + 1) as f64, e.ln()))
        .unzip();
    if ks.len() < MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_POINTS,
            got: ks.len(),
        });
    }
    let log_ks: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let lin = least_squares_line(&ks, &logs);
    let sub = least_squares_line(&log_ks, &logs);
    let ratio = lin.slope.exp();
    let power = -sub.slope;
    let params = RateParams {
        ratio: Some(ratio),
        power: Some(power),
        first_zero: None,
        linear_r2: Some(lin.r2),
        sublinear_r2: Some(sub.r2),
        points: ks.len(),
    };
    Ok(if lin.r2 >= sub.r2 {
        RateFit {
            theta_hat: 0.5,
            regime: Regime::Linear,
            fit_quality: lin.r2,
            params,
        }
    } else {
        RateFit {
            theta_hat: theta_from_power(power),
            regime: Regime::Sublinear,
            fit_quality: sub.r2,
            params,
        }
    })
}

/// `R_k - R_last` for a trace of regularized Lagrangian values, cut at the
/// first gap below the round-off floor.
pub fn lyapunov_gaps(values: &[f64]) -> Vec<f64> {
    let Some(&last) = values.last() else {
        return Vec::new();
    };
    let floor = GAP_NOISE_FLOOR * (1.0 + last.abs());
    values
        .iter()
        .map(|v| v - last)
        .take_while(|&g| g > floor)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_is_linear() {
        let e: Vec<f64> = (1..=100).map(|k| 0.5f64.powi(k)).collect();
        let fit = fit_kl_rate(&e, DEFAULT_TAIL_FRACTION).unwrap();
        assert_eq!(fit.regime, Regime::Linear);
        assert!((fit.params.ratio.unwrap() - 0.5).abs() < 1e-9);
        assert!(fit.theta_hat > 0.0 && fit.theta_hat <= 0.5);
    }

    #[test]
    fn inverse_square_is_sublinear() {
        let e: Vec<f64> = (1..=100).map(|k| (k as f64).powi(-2)).collect();
        let fit = fit_kl_rate(&e, DEFAULT_TAIL_FRACTION).unwrap();
        assert_eq!(fit.regime, Regime::Sublinear);
        assert!((fit.theta_hat - 0.75).abs() < 1e-9);
    }

    #[test]
    fn trailing_zeros_are_finite() {
        let e: Vec<f64> = (1..=20).map(|k| if k >= 7 { 0.0 } else { 1.0 / k as f64 }).collect();
        let fit = fit_kl_rate(&e, DEFAULT_TAIL_FRACTION).unwrap();
        assert_eq!(fit.regime, Regime::Finite);
        assert_eq!(fit.theta_hat, 0.0);
        assert_eq!(fit.params.first_zero, Some(7));
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            fit_kl_rate(&[1.0; 9], 0.5),
            Err(Error::InsufficientData { needed: 10, got: 9 })
        ));
        assert!(matches!(
            fit_kl_rate(&[1.0; 15], 0.5),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn gaps_stop_at_the_floor() {
        let g = lyapunov_gaps(&[3.0, 2.0, 1.5, 1.0 + 1e-15, 1.0]);
        assert_eq!(g, vec![2.0, 1.0, 0.5]);
        assert!(lyapunov_gaps(&[]).is_empty());
    }
}
