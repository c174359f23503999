//! Separable 2-D correlation over row-major `f64` planes.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Border {
    /// Edge samples repeat (`aaa|abcd|ddd`).
    Replicate,
    /// Mirror including the edge sample (`cba|abcd|dcb`).
    Symmetric,
}

impl Border {
    #[inline]
    fn index(self, i: isize, len: usize) -> usize {
        let n = len as isize;
        match self {
            Border::Replicate => i.clamp(0, n - 1) as usize,
            Border::Symmetric => {
                let period = 2 * n;
                let mut j = i.rem_euclid(period);
                if j >= n {
                    j = period - 1 - j;
                }
                j as usize
            }
        }
    }
}

/// Normalised sampled Gaussian of radius `radius`.
pub(crate) fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Correlates every row with `kernel` (odd length, centred).
pub(crate) fn filter_rows(
    src: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
    border: Border,
) -> Vec<f64> {
    debug_assert_eq!(src.len(), width * height);
    debug_assert!(kernel.len() % 2 == 1);
    let r = kernel.len() / 2;
    let mut out = vec![0.0; src.len()];
    let mut padded = vec![0.0; width + 2 * r];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for (i, p) in padded.iter_mut().enumerate() {
            *p = row[border.index(i as isize - r as isize, width)];
        }
        let dst = &mut out[y * width..(y + 1) * width];
        for (x, d) in dst.iter_mut().enumerate() {
            *d = kernel
                .iter()
                .zip(&padded[x..x + kernel.len()])
                .map(|(k, v)| k * v)
                .sum();
        }
    }
    out
}

/// Correlates every column with `kernel` (odd length, centred).
pub(crate) fn filter_cols(
    src: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
    border: Border,
) -> Vec<f64> {
    debug_assert_eq!(src.len(), width * height);
    debug_assert!(kernel.len() % 2 == 1);
    let r = kernel.len() as isize / 2;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        let dst = &mut out[y * width..(y + 1) * width];
        for (i, &k) in kernel.iter().enumerate() {
            if k == 0.0 {
                continue;
            }
            let sy = border.index(y as isize + i as isize - r, height);
            let row = &src[sy * width..(sy + 1) * width];
            for (d, v) in dst.iter_mut().zip(row) {
                *d += k * v;
            }
        }
    }
    out
}

pub(crate) fn filter_separable(
    src: &[f64],
    width: usize,
    height: usize,
    kernel_x: &[f64],
    kernel_y: &[f64],
    border: Border,
) -> Vec<f64> {
    let tmp = filter_rows(src, width, height, kernel_x, border);
    filter_cols(&tmp, width, height, kernel_y, border)
}
