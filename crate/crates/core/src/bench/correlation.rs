use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

use crate::error::{Error, Result};

/// Optional monotone mapping of predictions before the Pearson correlation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PlccFit {
    #[default]
    None,
    /// `b2 + (b1 - b2) / (1 + exp(-(x - b3) / |b4|))`, least squares.
    Logistic4,
}

impl std::str::FromStr for PlccFit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "logistic4" => Ok(Self::Logistic4),
            _ => Err(Error::invalid(format!(
                "unknown PLCC fit `{s}` (expected none or logistic4)"
            ))),
        }
    }
}

impl PlccFit {
    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Logistic4 => "logistic4",
        }
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 2 pairs, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("correlation inputs must be finite"));
    }
    Ok(())
}

fn pearson_unchecked(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::UndefinedCorrelation("an input is constant"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson linear correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson_unchecked(x, y)
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank-order correlation with fractional ranks for ties.
pub fn srcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson_unchecked(&fractional_ranks(x), &fractional_ranks(y))
}

/// Pearson correlation, optionally after a fitted logistic mapping of `x`
/// (signed by the direction of the fitted curve).
pub fn plcc(x: &[f64], y: &[f64], fit: PlccFit) -> Result<f64> {
    check_pair(x, y)?;
    match fit {
        PlccFit::None => pearson_unchecked(x, y),
        PlccFit::Logistic4 => {
            pearson_unchecked(x, y)?;
            match fit_logistic4(x, y) {
                Some(params) => {
                    let mapped: Vec<f64> = x.iter().map(|&v| logistic4(&params, v)).collect();
                    // Correlating the fitted curve with `y` is direction-blind;
                    // report it with the curve's direction so the sign agrees
                    // with the rank correlation.
                    let direction = if params[0] >= params[1] { 1.0 } else { -1.0 };
                    pearson_unchecked(&mapped, y)
                        .map(|r| direction * r)
                        .or_else(|_| pearson_unchecked(x, y))
                }
                None => {
                    log::warn!("logistic fit did not converge; reporting linear PLCC");
                    pearson_unchecked(x, y)
                }
            }
        }
    }
}

pub fn logistic4(b: &Vector4<f64>, x: f64) -> f64 {
    b[1] + (b[0] - b[1]) / (1.0 + (-(x - b[2]) / b[3].abs()).exp())
}

fn jacobian_row(b: &Vector4<f64>, x: f64) -> [f64; 4] {
    let s = b[3].abs();
    let e = (-(x - b[2]) / s).exp();
    let p = 1.0 / (1.0 + e);
    // d p / d t with t = (x - b3) / s is p (1 - p).
    let dp = p * (1.0 - p);
    let amp = b[0] - b[1];
    let dt_db3 = -1.0 / s;
    let dt_db4 = -(x - b[2]) / (s * s) * b[3].signum();
    [p, 1.0 - p, amp * dp * dt_db3, amp * dp * dt_db4]
}

/// Levenberg-Marquardt least-squares fit of [`logistic4`]; `None` when the
/// fit degenerates.
pub fn fit_logistic4(x: &[f64], y: &[f64]) -> Option<Vector4<f64>> {
    let n = x.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mx = mean(x);
    let sx = (x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / n as f64).sqrt();
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    // Start increasing or decreasing depending on the linear trend.
    let rising = pearson_unchecked(x, y).ok()? >= 0.0;
    let (hi, lo) = if rising { (ymax, ymin) } else { (ymin, ymax) };
    let mut b = Vector4::new(hi, lo, mx, if sx > 0.0 { sx } else { 1.0 });

    let sse = |b: &Vector4<f64>| {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| (logistic4(b, xi) - yi).powi(2))
            .sum::<f64>()
    };
    let mut cost = sse(&b);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut j = DMatrix::zeros(n, 4);
        let mut r = DVector::zeros(n);
        for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            j.row_mut(i).copy_from_slice(&jacobian_row(&b, xi));
            r[i] = yi - logistic4(&b, xi);
        }
        let jt = j.transpose();
        let jtj: Matrix4<f64> = (&jt * &j).fixed_view::<4, 4>(0, 0).into_owned();
        let g: Vector4<f64> = (&jt * &r).fixed_rows::<4>(0).into_owned();
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&g) else {
                lambda *= 10.0;
                continue;
            };
            let cand = b + step;
            let c = sse(&cand);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                b = cand;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-12;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (b.iter().all(|v| v.is_finite()) && b[3] != 0.0).then_some(b)
}
