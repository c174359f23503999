use nalgebra::{DMatrix, DVector};

use super::fit::aggd_unchecked;
use super::mscn::mscn;
use super::NiqeConfig;
use crate::error::{Error, Result};
use crate::ingest::resample::resize_plane;
use crate::FrameImage;

/// Features contributed by one scale: AGGD of the MSCN block plus four
/// neighbour-product fits.
pub const FEATURES_PER_SCALE: usize = 18;

const NEIGHBOUR_SHIFTS: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];

/// Which patches enter the frame statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatchSelection {
    /// Every patch with a well-defined fit (used when scoring).
    All,
    /// Patches whose mean local contrast is at least `fraction` of the
    /// sharpest patch (used when fitting a pristine model).
    Sharpest { fraction: f64 },
}

/// Per-patch feature rows of one frame.
#[derive(Debug, Clone)]
pub struct PatchFeatures {
    pub rows: Vec<Vec<f64>>,
    /// Mean local standard deviation of each row's patch at the finest scale.
    pub sharpness: Vec<f64>,
    /// Patches dropped because a fit was undefined (e.g. a flat patch).
    pub dropped: usize,
    /// The frame was too small for patches and was treated as one block.
    pub whole_frame: bool,
}

/// Mean feature vector and covariance of the selected patches of a frame.
#[derive(Debug, Clone)]
pub struct FrameStatistics {
    pub mean: DVector<f64>,
    /// Sample (`n - 1`) covariance; zero when only one patch is available.
    pub covariance: DMatrix<f64>,
    pub patch_count: usize,
    pub whole_frame: bool,
}

fn block_features(block: &[f64], bw: usize, bh: usize, out: &mut Vec<f64>) -> Result<()> {
    let base = aggd_unchecked(block)?;
    out.push(base.alpha);
    out.push((base.beta_left + base.beta_right) / 2.0);
    let mut products = vec![0.0; block.len()];
    for (dy, dx) in NEIGHBOUR_SHIFTS {
        // Circular shift inside the block: products[y][x] = b[y][x] * b[y-dy][x-dx].
        for y in 0..bh {
            let sy = (y as isize - dy).rem_euclid(bh as isize) as usize;
            for x in 0..bw {
                let sx = (x as isize - dx).rem_euclid(bw as isize) as usize;
                products[y * bw + x] = block[y * bw + x] * block[sy * bw + sx];
            }
        }
        let fit = aggd_unchecked(&products)?;
        out.extend([fit.alpha, fit.eta, fit.beta_left, fit.beta_right]);
    }
    Ok(())
}

fn extract_block(
    plane: &[f64],
    width: usize,
    x0: usize,
    y0: usize,
    bw: usize,
    bh: usize,
) -> Vec<f64> {
    let mut block = Vec::with_capacity(bw * bh);
    for y in y0..y0 + bh {
        block.extend_from_slice(&plane[y * width + x0..y * width + x0 + bw]);
    }
    block
}

/// Smallest frame side accepted by the whole-frame fallback.
pub fn min_frame_side(config: &NiqeConfig) -> usize {
    config.window_size << config.scales
}

/// Computes the feature row of every patch of a luma plane.
///
/// The plane is cropped to whole patches; at each coarser scale it is
/// halved with antialiased bicubic resampling and the patch side halves too.
/// Frames with a side shorter than two patches are treated as one patch.
pub fn patch_features(
    luma: &[f64],
    width: usize,
    height: usize,
    config: &NiqeConfig,
) -> Result<PatchFeatures> {
    config.validate()?;
    if luma.len() != width * height {
        return Err(Error::invalid(
            "luma plane length does not match its dimensions",
        ));
    }
    if width.min(height) < min_frame_side(config) {
        return Err(Error::DegenerateFrame(format!(
            "{width}x{height} frame is below the {} pixel minimum for spatial statistics",
            min_frame_side(config)
        )));
    }
    let p = config.patch_size;
    let whole_frame = width.min(height) < 2 * p;
    let step = 1usize << (config.scales - 1);
    let (cw, ch, pw, ph) = if whole_frame {
        // Crop so each halving is exact.
        let cw = width / step * step;
        let ch = height / step * step;
        (cw, ch, cw, ch)
    } else {
        (width / p * p, height / p * p, p, p)
    };
    let (nx, ny) = (cw / pw, ch / ph);
    let mut plane = extract_block(luma, width, 0, 0, cw, ch);
    let (mut w, mut h) = (cw, ch);

    let patches = nx * ny;
    let mut rows: Vec<Option<Vec<f64>>> =
        vec![Some(Vec::with_capacity(FEATURES_PER_SCALE * config.scales)); patches];
    let mut sharpness = vec![0.0; patches];
    for scale in 0..config.scales {
        if scale > 0 {
            plane = resize_plane(&plane, w, h, 1, w / 2, h / 2);
            w /= 2;
            h /= 2;
        }
        let field = mscn(
            &plane,
            w,
            h,
            config.window_size,
            config.window_sigma,
            config.stabilizer,
        )?;
        let (bw, bh) = (pw >> scale, ph >> scale);
        for by in 0..ny {
            for bx in 0..nx {
                let idx = by * nx + bx;
                if scale == 0 {
                    let s = extract_block(&field.local_std, w, bx * bw, by * bh, bw, bh);
                    sharpness[idx] = s.iter().sum::<f64>() / s.len() as f64;
                }
                let Some(row) = rows[idx].as_mut() else {
                    continue;
                };
                let block = extract_block(&field.coefficients, w, bx * bw, by * bh, bw, bh);
                if block_features(&block, bw, bh, row).is_err() {
                    rows[idx] = None;
                }
            }
        }
    }
    let mut out = PatchFeatures {
        rows: Vec::new(),
        sharpness: Vec::new(),
        dropped: 0,
        whole_frame,
    };
    for (row, s) in rows.into_iter().zip(sharpness) {
        match row {
            Some(r) if r.iter().all(|v| v.is_finite()) => {
                out.rows.push(r);
                out.sharpness.push(s);
            }
            _ => out.dropped += 1,
        }
    }
    Ok(out)
}

impl PatchFeatures {
    /// Rows kept under `selection`.
    pub fn select(&self, selection: PatchSelection) -> Vec<&[f64]> {
        match selection {
            PatchSelection::All => self.rows.iter().map(Vec::as_slice).collect(),
            PatchSelection::Sharpest { fraction } => {
                let max = self
                    .sharpness
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                self.rows
                    .iter()
                    .zip(&self.sharpness)
                    .filter(|(_, &s)| s >= fraction * max)
                    .map(|(r, _)| r.as_slice())
                    .collect()
            }
        }
    }

    pub fn statistics(&self, selection: PatchSelection) -> Result<FrameStatistics> {
        let rows = self.select(selection);
        if rows.is_empty() {
            return Err(Error::DegenerateFrame(
                "no patch has well-defined statistics".into(),
            ));
        }
        let (mean, covariance) = mean_and_covariance(&rows, true);
        Ok(FrameStatistics {
            mean,
            covariance,
            patch_count: rows.len(),
            whole_frame: self.whole_frame,
        })
    }
}

/// Column means and covariance of `rows`; `sample` selects the `n - 1`
/// normalisation (a single row yields a zero covariance).
pub(crate) fn mean_and_covariance(rows: &[&[f64]], sample: bool) -> (DVector<f64>, DMatrix<f64>) {
    let d = rows[0].len();
    let n = rows.len();
    let mut mean = DVector::zeros(d);
    for r in rows {
        mean += DVector::from_column_slice(r);
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    let denom = if sample { n.saturating_sub(1) } else { n };
    if denom > 0 {
        let mut centred = DMatrix::zeros(n, d);
        for (i, r) in rows.iter().enumerate() {
            for j in 0..d {
                centred[(i, j)] = r[j] - mean[j];
            }
        }
        cov = centred.transpose() * &centred / denom as f64;
    }
    (mean, cov)
}

/// Frame statistics over all usable patches of a luma frame.
pub fn niqe_features(frame: &FrameImage, config: &NiqeConfig) -> Result<FrameStatistics> {
    let luma = frame.luma_f64()?;
    patch_features(&luma, frame.width(), frame.height(), config)?.statistics(PatchSelection::All)
}
