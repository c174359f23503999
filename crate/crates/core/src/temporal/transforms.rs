//! Default perceptual-domain transforms.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::filter::{filter_cols, filter_rows, filter_separable, gaussian_kernel, Border};
use crate::FrameImage;

/// Maps a luma frame to a flattened neural response vector.
///
/// Implementations must be deterministic and map a constant frame to the
/// zero vector.
pub trait PerceptualTransform: Send + Sync {
    fn name(&self) -> &str;

    /// Length of the response for a `width` x `height` frame.
    fn response_len(&self, width: usize, height: usize) -> usize;

    fn response(&self, frame: &FrameImage) -> Result<Vec<f64>>;
}

fn luma_plane(frame: &FrameImage) -> Result<Vec<f64>> {
    if !frame.is_luma() {
        return Err(Error::invalid(format!(
            "perceptual transforms take single-channel frames, got {} channels",
            frame.channels()
        )));
    }
    frame.luma_f64()
}

fn subtract_mean(v: &mut [f64]) {
    if v.iter().all(|x| *x == v[0]) {
        v.fill(0.0);
        return;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

/// Lateral-geniculate stage: square-root luminance compression,
/// centre-surround difference of Gaussians and divisive normalisation by
/// the local mean magnitude of the band-pass signal.
#[derive(Debug, Clone, PartialEq)]
pub struct LgnTransform {
    pub center_sigma: f64,
    pub surround_sigma: f64,
    pub normalization_window: usize,
}

impl Default for LgnTransform {
    fn default() -> Self {
        Self {
            center_sigma: 1.0,
            surround_sigma: 2.0,
            normalization_window: 9,
        }
    }
}

impl PerceptualTransform for LgnTransform {
    fn name(&self) -> &str {
        "lgn"
    }

    fn response_len(&self, width: usize, height: usize) -> usize {
        width * height
    }

    fn response(&self, frame: &FrameImage) -> Result<Vec<f64>> {
        let (w, h) = (frame.width(), frame.height());
        let mut l: Vec<f64> = luma_plane(frame)?
            .into_iter()
            .map(|v| (v / 255.0).sqrt())
            .collect();
        // Filters below are linear with unit gain, so removing the mean first
        // makes a constant frame map to exactly zero.
        subtract_mean(&mut l);
        let kc = gaussian_kernel(self.center_sigma, radius(self.center_sigma));
        let ks = gaussian_kernel(self.surround_sigma, radius(self.surround_sigma));
        let center = filter_separable(&l, w, h, &kc, &kc, Border::Symmetric);
        let surround = filter_separable(&l, w, h, &ks, &ks, Border::Symmetric);
        let band: Vec<f64> = center.iter().zip(&surround).map(|(c, s)| c - s).collect();
        let magnitude: Vec<f64> = band.iter().map(|v| v.abs()).collect();
        let n = self.normalization_window;
        let boxk = vec![1.0 / n as f64; n];
        let local = filter_separable(&magnitude, w, h, &boxk, &boxk, Border::Symmetric);
        Ok(band
            .iter()
            .zip(&local)
            .map(|(b, m)| b / (1.0 + m))
            .collect())
    }
}

/// Primary-visual-cortex stage: quadrature Gabor energy at several
/// orientations and wavelengths, divisively normalised by the summed
/// energy over orientations at the same wavelength.
///
/// Channel layout is wavelength-major, then orientation, each a row-major
/// plane.
#[derive(Debug, Clone, PartialEq)]
pub struct V1Transform {
    /// Orientation of the carrier's wave vector, in degrees; 0 responds to
    /// vertical stripes.
    pub orientations_deg: Vec<f64>,
    pub wavelengths: Vec<f64>,
    /// Envelope standard deviation as a multiple of the wavelength.
    pub sigma_per_wavelength: f64,
}

impl Default for V1Transform {
    fn default() -> Self {
        Self {
            orientations_deg: vec![0.0, 45.0, 90.0, 135.0],
            wavelengths: vec![4.0, 8.0],
            sigma_per_wavelength: 0.5,
        }
    }
}

struct ComplexKernel {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexKernel {
    fn modulated(envelope: &[f64], frequency: f64) -> Self {
        let r = (envelope.len() / 2) as f64;
        let phase = |i: usize| frequency * (i as f64 - r);
        Self {
            re: envelope
                .iter()
                .enumerate()
                .map(|(i, g)| g * phase(i).cos())
                .collect(),
            im: envelope
                .iter()
                .enumerate()
                .map(|(i, g)| g * phase(i).sin())
                .collect(),
        }
    }
}

fn is_zero(k: &[f64]) -> bool {
    k.iter().all(|v| v.abs() < 1e-15)
}

/// Complex separable filtering of a real plane: returns `(re, im)` of the
/// correlation with `hx(x) * hy(y)`.
fn complex_separable(
    src: &[f64],
    w: usize,
    h: usize,
    hx: &ComplexKernel,
    hy: &ComplexKernel,
) -> (Vec<f64>, Vec<f64>) {
    let zeros = || vec![0.0; src.len()];
    let rows_re = filter_rows(src, w, h, &hx.re, Border::Symmetric);
    let rows_im = if is_zero(&hx.im) {
        zeros()
    } else {
        filter_rows(src, w, h, &hx.im, Border::Symmetric)
    };
    let cols = |plane: &[f64], k: &[f64]| {
        if is_zero(k) {
            zeros()
        } else {
            filter_cols(plane, w, h, k, Border::Symmetric)
        }
    };
    let (a, b) = (cols(&rows_re, &hy.re), cols(&rows_im, &hy.im));
    let (c, d) = (cols(&rows_re, &hy.im), cols(&rows_im, &hy.re));
    let re = a.iter().zip(&b).map(|(a, b)| a - b).collect();
    let im = c.iter().zip(&d).map(|(c, d)| c + d).collect();
    (re, im)
}

impl V1Transform {
    pub fn channels(&self) -> usize {
        self.orientations_deg.len() * self.wavelengths.len()
    }
}

impl PerceptualTransform for V1Transform {
    fn name(&self) -> &str {
        "v1"
    }

    fn response_len(&self, width: usize, height: usize) -> usize {
        self.channels() * width * height
    }

    fn response(&self, frame: &FrameImage) -> Result<Vec<f64>> {
        let (w, h) = (frame.width(), frame.height());
        let mut l: Vec<f64> = luma_plane(frame)?.into_iter().map(|v| v / 255.0).collect();
        subtract_mean(&mut l);
        let plane = w * h;
        let mut out = Vec::with_capacity(self.response_len(w, h));
        for &lambda in &self.wavelengths {
            let sigma = self.sigma_per_wavelength * lambda;
            let r = radius(sigma) as isize;
            let env: Vec<f64> = (-r..=r)
                .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
                .collect();
            let env_sum: f64 = env.iter().sum();
            let blurred = filter_separable(&l, w, h, &env, &env, Border::Symmetric);
            let k = 2.0 * PI / lambda;
            let start = out.len();
            for &deg in &self.orientations_deg {
                let theta = deg.to_radians();
                let hx = ComplexKernel::modulated(&env, k * theta.cos());
                let hy = ComplexKernel::modulated(&env, k * theta.sin());
                // The even (cosine) filter has a small DC gain; cancel it with
                // the matching multiple of the bare envelope response.
                let dc = (hx.re.iter().sum::<f64>() * hy.re.iter().sum::<f64>()
                    - hx.im.iter().sum::<f64>() * hy.im.iter().sum::<f64>())
                    / (env_sum * env_sum);
                let (even, odd) = complex_separable(&l, w, h, &hx, &hy);
                out.extend(
                    even.iter()
                        .zip(&odd)
                        .zip(&blurred)
                        .map(|((e, o), g)| ((e - dc * g).powi(2) + o * o).sqrt()),
                );
            }
            let energies = &mut out[start..];
            let mut total = vec![1.0; plane];
            for chan in energies.chunks(plane) {
                total.iter_mut().zip(chan).for_each(|(t, e)| *t += e);
            }
            for chan in energies.chunks_mut(plane) {
                chan.iter_mut().zip(&total).for_each(|(e, t)| *e /= t);
            }
        }
        Ok(out)
    }
}

/// Default LGN response of a luma frame.
pub fn lgn_response(frame: &FrameImage) -> Result<Vec<f64>> {
    LgnTransform::default().response(frame)
}

/// Default V1 response of a luma frame.
pub fn v1_response(frame: &FrameImage) -> Result<Vec<f64>> {
    V1Transform::default().response(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grating(w: usize, h: usize, vertical: bool, period: f64) -> FrameImage {
        FrameImage::from_fn_luma(w, h, |x, y| {
            let t = if vertical { x } else { y } as f64;
            (128.0 + 100.0 * (2.0 * PI * t / period).sin()) as f32
        })
        .unwrap()
    }

    #[test]
    fn constant_frames_give_zero_responses() {
        let f = FrameImage::filled(40, 30, 1, 77.0).unwrap();
        assert!(lgn_response(&f).unwrap().iter().all(|v| *v == 0.0));
        let v1 = v1_response(&f).unwrap();
        assert_eq!(v1.len(), 8 * 40 * 30);
        assert!(v1.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn response_shapes() {
        let f = grating(48, 27, true, 6.0);
        assert_eq!(lgn_response(&f).unwrap().len(), 48 * 27);
        assert_eq!(v1_response(&f).unwrap().len(), 8 * 48 * 27);
    }

    #[test]
    fn vertical_grating_prefers_zero_degrees() {
        let f = grating(64, 64, true, 5.0);
        let v1 = v1_response(&f).unwrap();
        let plane = 64 * 64;
        for scale in 0..2 {
            let means: Vec<f64> = (0..4)
                .map(|o| v1[(scale * 4 + o) * plane..][..plane].iter().sum::<f64>() / plane as f64)
                .collect();
            let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(means[0], best, "scale {scale}: {means:?}");
        }
        let h = v1_response(&grating(64, 64, false, 5.0)).unwrap();
        let m90: f64 = h[2 * plane..3 * plane].iter().sum();
        let m0: f64 = h[..plane].iter().sum();
        assert!(m90 > m0);
    }

    #[test]
    fn rejects_colour_frames() {
        let f = FrameImage::filled(16, 16, 3, 1.0).unwrap();
        assert!(lgn_response(&f).is_err());
        assert!(v1_response(&f).is_err());
    }
}
