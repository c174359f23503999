//! Separable bicubic resampling with MATLAB `imresize` conventions: Keys
//! cubic with `a = -0.5`, kernel stretched by `1/scale` when shrinking
//! (antialiasing), half-pixel centre alignment, symmetric edge mirroring and
//! per-output weight renormalisation.

use crate::{Error, FrameImage, Result};

const CUBIC_A: f64 = -0.5;
const CUBIC_SUPPORT: f64 = 4.0;

fn cubic(x: f64) -> f64 {
    let ax = x.abs();
    let ax2 = ax * ax;
    let ax3 = ax2 * ax;
    if ax <= 1.0 {
        (CUBIC_A + 2.0) * ax3 - (CUBIC_A + 3.0) * ax2 + 1.0
    } else if ax <= 2.0 {
        CUBIC_A * ax3 - 5.0 * CUBIC_A * ax2 + 8.0 * CUBIC_A * ax - 4.0 * CUBIC_A
    } else {
        0.0
    }
}

fn mirror(index: isize, len: usize) -> usize {
    let n = len as isize;
    let period = 2 * n;
    let mut i = index.rem_euclid(period);
    if i >= n {
        i = period - 1 - i;
    }
    i as usize
}

/// Contribution table for one axis: for every output sample, the source
/// indices and their normalised weights.
struct Contributions {
    taps: usize,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl Contributions {
    fn new(in_len: usize, out_len: usize) -> Self {
        let scale = out_len as f64 / in_len as f64;
        let (stretch, width) = if scale < 1.0 {
            (scale, CUBIC_SUPPORT / scale)
        } else {
            (1.0, CUBIC_SUPPORT)
        };
        let taps = width.ceil() as usize + 2;
        let mut indices = Vec::with_capacity(out_len * taps);
        let mut weights = Vec::with_capacity(out_len * taps);
        for i in 0..out_len {
            let u = (i as f64 + 0.5) / scale - 0.5;
            let left = (u - width / 2.0).floor() as isize;
            let start = weights.len();
            for k in 0..taps as isize {
                let j = left + k;
                weights.push(cubic((u - j as f64) * stretch));
                indices.push(mirror(j, in_len));
            }
            let sum: f64 = weights[start..].iter().sum();
            for w in &mut weights[start..] {
                *w /= sum;
            }
        }
        Self {
            taps,
            indices,
            weights,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let s = i * self.taps;
        (
            &self.indices[s..s + self.taps],
            &self.weights[s..s + self.taps],
        )
    }
}

/// Resizes a plane of `f64` samples (`channels` interleaved) without clamping.
pub(crate) fn resize_plane(
    data: &[f64],
    width: usize,
    height: usize,
    channels: usize,
    out_w: usize,
    out_h: usize,
) -> Vec<f64> {
    let horizontal = if out_w != width {
        let table = Contributions::new(width, out_w);
        let mut out = vec![0.0; out_w * height * channels];
        for y in 0..height {
            let src = &data[y * width * channels..(y + 1) * width * channels];
            let dst = &mut out[y * out_w * channels..(y + 1) * out_w * channels];
            for x in 0..out_w {
                let (idx, w) = table.row(x);
                for c in 0..channels {
                    dst[x * channels + c] = idx
                        .iter()
                        .zip(w)
                        .map(|(&j, &w)| src[j * channels + c] * w)
                        .sum();
                }
            }
        }
        out
    } else {
        data.to_vec()
    };
    if out_h == height {
        return horizontal;
    }
    let table = Contributions::new(height, out_h);
    let stride = out_w * channels;
    let mut out = vec![0.0; stride * out_h];
    for y in 0..out_h {
        let (idx, w) = table.row(y);
        let dst = &mut out[y * stride..(y + 1) * stride];
        for (&j, &wt) in idx.iter().zip(w) {
            let src = &horizontal[j * stride..(j + 1) * stride];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * wt;
            }
        }
    }
    out
}

/// Bicubic resize to `target_w x target_h`. Same-size requests return an
/// identical copy; outputs are clamped to `[0, 255]`.
pub fn resize_bicubic(frame: &FrameImage, target_w: usize, target_h: usize) -> Result<FrameImage> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::invalid(format!(
            "resize target must be positive, got {target_w}x{target_h}"
        )));
    }
    if target_w == frame.width() && target_h == frame.height() {
        return Ok(frame.clone());
    }
    let src: Vec<f64> = frame.data().iter().map(|&v| f64::from(v)).collect();
    let out = resize_plane(
        &src,
        frame.width(),
        frame.height(),
        frame.channels(),
        target_w,
        target_h,
    );
    let data = out
        .into_iter()
        .map(|v| v.clamp(0.0, 255.0) as f32)
        .collect();
    FrameImage::new(target_w, target_h, frame.channels(), data)
}
