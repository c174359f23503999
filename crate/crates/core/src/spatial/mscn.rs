use crate::error::{Error, Result};
use crate::filter::{filter_separable, gaussian_kernel, Border};

/// Mean-subtracted, contrast-normalised coefficients of a luma plane,
/// together with the local standard deviation used to normalise them.
#[derive(Debug, Clone)]
pub struct MscnField {
    pub width: usize,
    pub height: usize,
    pub coefficients: Vec<f64>,
    pub local_std: Vec<f64>,
}

/// `(I - mu) / (sigma + stabilizer)` with `mu`, `sigma` from a normalised
/// Gaussian window of side `window` (odd) and standard deviation
/// `window_sigma`; borders replicate the edge pixels.
pub fn mscn(
    luma: &[f64],
    width: usize,
    height: usize,
    window: usize,
    window_sigma: f64,
    stabilizer: f64,
) -> Result<MscnField> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "MSCN window must be odd, got {window}"
        )));
    }
    if width < window || height < window {
        return Err(Error::invalid(format!(
            "{width}x{height} plane is smaller than the {window}x{window} MSCN window"
        )));
    }
    if luma.len() != width * height {
        return Err(Error::invalid(
            "luma plane length does not match its dimensions",
        ));
    }
    let kernel = gaussian_kernel(window_sigma, window / 2);
    // Computed on the raw values (no centring) so that exactly flat regions,
    // e.g. black borders, give exact zeros, as in the reference algorithm.
    let squared: Vec<f64> = luma.iter().map(|v| v * v).collect();
    let mu = filter_separable(luma, width, height, &kernel, &kernel, Border::Replicate);
    let mu_sq = filter_separable(&squared, width, height, &kernel, &kernel, Border::Replicate);
    let local_std: Vec<f64> = mu
        .iter()
        .zip(&mu_sq)
        .map(|(m, s)| (s - m * m).abs().sqrt())
        .collect();
    let coefficients = luma
        .iter()
        .zip(&mu)
        .zip(&local_std)
        .map(|((v, m), s)| (v - m) / (s + stabilizer))
        .collect();
    Ok(MscnField {
        width,
        height,
        coefficients,
        local_std,
    })
}
