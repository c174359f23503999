//! Moment-matching fits of generalized Gaussian distributions.
//!
//! Both fits search the shape parameter over the grid `0.2, 0.201, ..., 10`
//! and pick the first grid point whose theoretical moment ratio is closest to
//! the empirical one.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Smallest sample count for which the fits are considered reliable.
pub const MIN_FIT_SAMPLES: usize = 100;

const GRID_START: f64 = 0.2;
const GRID_STEP: f64 = 0.001;
const GRID_LEN: usize = 9801;

/// Zero-mean GGD fit: shape `alpha` and variance `sigma_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgdFit {
    pub alpha: f64,
    pub sigma_sq: f64,
}

/// Asymmetric GGD fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggdFit {
    pub alpha: f64,
    /// Mean of the fitted distribution, `(beta_r - beta_l) * G(2/a) / G(1/a)`.
    pub eta: f64,
    pub beta_left: f64,
    pub beta_right: f64,
}

struct ShapeTable {
    alpha: Vec<f64>,
    /// `G(1/a) G(3/a) / G(2/a)^2`, the GGD ratio `E[x^2] / E[|x|]^2`.
    ggd: Vec<f64>,
    /// `G(2/a)^2 / (G(1/a) G(3/a))`, its reciprocal as used by the AGGD fit.
    aggd: Vec<f64>,
}

fn table() -> &'static ShapeTable {
    static TABLE: OnceLock<ShapeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let alpha: Vec<f64> = (0..GRID_LEN)
            .map(|i| GRID_START + i as f64 * GRID_STEP)
            .collect();
        let log_ratio: Vec<f64> = alpha
            .iter()
            .map(|&a| ln_gamma(1.0 / a) + ln_gamma(3.0 / a) - 2.0 * ln_gamma(2.0 / a))
            .collect();
        ShapeTable {
            ggd: log_ratio.iter().map(|l| l.exp()).collect(),
            aggd: log_ratio.iter().map(|l| (-l).exp()).collect(),
            alpha,
        }
    })
}

fn closest(curve: &[f64], target: f64) -> usize {
    let mut best = 0;
    let mut best_err = f64::INFINITY;
    for (i, &v) in curve.iter().enumerate() {
        let err = (v - target).abs();
        if err < best_err {
            best_err = err;
            best = i;
        }
    }
    best
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "distribution fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite sample"));
    }
    Ok(())
}

/// Fits a zero-mean GGD by matching `E[x^2] / E[|x|]^2`.
pub fn fit_ggd(samples: &[f64]) -> Result<GgdFit> {
    check_samples(samples)?;
    let n = samples.len() as f64;
    let second = samples.iter().map(|v| v * v).sum::<f64>() / n;
    let abs_mean = samples.iter().map(|v| v.abs()).sum::<f64>() / n;
    if second <= 0.0 {
        return Err(Error::DegenerateFit("zero variance"));
    }
    let rho = second / (abs_mean * abs_mean);
    let t = table();
    Ok(GgdFit {
        alpha: t.alpha[closest(&t.ggd, rho)],
        sigma_sq: second,
    })
}

/// Fits an asymmetric GGD from the one-sided second moments.
///
/// Fails when either side of zero has no samples.
pub fn fit_aggd(samples: &[f64]) -> Result<AggdFit> {
    check_samples(samples)?;
    aggd_unchecked(samples)
}

/// As [`fit_aggd`] without the sample-count floor; used on small patches.
pub(crate) fn aggd_unchecked(samples: &[f64]) -> Result<AggdFit> {
    let (mut left_sq, mut left_n, mut right_sq, mut right_n) = (0.0, 0usize, 0.0, 0usize);
    let (mut abs_sum, mut sq_sum) = (0.0, 0.0);
    for &v in samples {
        if v < 0.0 {
            left_sq += v * v;
            left_n += 1;
        } else if v > 0.0 {
            right_sq += v * v;
            right_n += 1;
        }
        abs_sum += v.abs();
        sq_sum += v * v;
    }
    if left_n == 0 || right_n == 0 {
        return Err(Error::DegenerateFit("samples lie on one side of zero"));
    }
    let n = samples.len() as f64;
    let left_std = (left_sq / left_n as f64).sqrt();
    let right_std = (right_sq / right_n as f64).sqrt();
    let gamma_hat = left_std / right_std;
    let abs_mean = abs_sum / n;
    let r_hat = abs_mean * abs_mean / (sq_sum / n);
    let r_norm = r_hat * (gamma_hat.powi(3) + 1.0) * (gamma_hat + 1.0)
        / (gamma_hat * gamma_hat + 1.0).powi(2);

    let t = table();
    let alpha = t.alpha[closest(&t.aggd, r_norm)];
    let scale = ((ln_gamma(1.0 / alpha) - ln_gamma(3.0 / alpha)).exp()).sqrt();
    let beta_left = left_std * scale;
    let beta_right = right_std * scale;
    let eta = (beta_right - beta_left) * (ln_gamma(2.0 / alpha) - ln_gamma(1.0 / alpha)).exp();
    Ok(AggdFit {
        alpha,
        eta,
        beta_left,
        beta_right,
    })
}
