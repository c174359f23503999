use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::features::{
    mean_and_covariance, patch_features, FrameStatistics, PatchSelection, FEATURES_PER_SCALE,
};
use super::NiqeConfig;
use crate::error::{Error, Result};
use crate::FrameImage;

const MAGIC: &str = "NIQE-MVG";
const SYMMETRY_TOLERANCE: f64 = 1e-9;
const PSD_TOLERANCE: f64 = 1e-8;
const PINV_TOLERANCE: f64 = 1e-10;

/// Multivariate Gaussian of patch features fitted on pristine images.
#[derive(Debug, Clone, PartialEq)]
pub struct NiqeModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

/// Distance of a frame from the pristine model; lower is more natural.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RawNiqeScore(f64);

impl RawNiqeScore {
    /// Wraps a previously computed distance (e.g. read back from a report).
    pub fn from_value(value: f64) -> Self {
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl NiqeModel {
    /// Validates dimensions, finiteness, symmetry and positive
    /// semi-definiteness of the covariance.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || covariance.shape() != (d, d) {
            return Err(Error::InvalidModel(format!(
                "mean has {d} entries but covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "covariance is not symmetric (max deviation {asym:e})"
            )));
        }
        let min_eig = SymmetricEigen::new(covariance.clone()).eigenvalues.min();
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::InvalidModel(format!(
                "covariance is not positive semi-definite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { mean, covariance })
    }

    /// The model shipped with the library, fitted on the bundled pristine
    /// photographs with the default configuration.
    pub fn pristine_default() -> Self {
        Self::parse_str(
            include_str!("../../assets/niqe_pristine.mvg"),
            Path::new("<bundled>"),
        )
        .expect("bundled pristine model is valid")
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Text format: a `NIQE-MVG <d>` header line, one line with the `d`
    /// means, then `d` covariance rows. `#` starts a comment line.
    pub fn to_text(&self) -> String {
        let d = self.dimension();
        let mut s = format!("{MAGIC} {d}\n");
        let join = |it: &mut dyn Iterator<Item = f64>| {
            it.map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(s, "{}", join(&mut self.mean.iter().copied()));
        for r in 0..d {
            let _ = writeln!(s, "{}", join(&mut self.covariance.row(r).iter().copied()));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse_str(&std::fs::read_to_string(path)?, path)
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty model file"))?;
        let d = match header.split_whitespace().collect::<Vec<_>>()[..] {
            [MAGIC, d] => d
                .parse::<usize>()
                .map_err(|_| Error::parse(path, ln, "bad dimension"))?,
            _ => {
                return Err(Error::parse(
                    path,
                    ln,
                    format!("expected `{MAGIC} <dimension>` header"),
                ))
            }
        };
        let mut numbers = |what: &str| -> Result<Vec<f64>> {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(path, 0, format!("missing {what}")))?;
            let vals = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(path, ln, format!("bad number `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != d {
                return Err(Error::parse(
                    path,
                    ln,
                    format!("expected {d} values in {what}, found {}", vals.len()),
                ));
            }
            Ok(vals)
        };
        let mean = DVector::from_vec(numbers("mean")?);
        let mut cov = DMatrix::zeros(d, d);
        for r in 0..d {
            let row = numbers("covariance row")?;
            cov.row_mut(r).copy_from_slice(&row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::parse(path, ln, "trailing data after covariance"));
        }
        Self::new(mean, cov)
    }

    /// `sqrt(d^T pinv((S_model + S_frame) / 2) d)` with `d` the difference of
    /// the means.
    pub fn score(&self, frame: &FrameStatistics) -> Result<RawNiqeScore> {
        if frame.mean.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: frame.mean.len(),
            });
        }
        let pooled = (&self.covariance + &frame.covariance) / 2.0;
        let diff = &self.mean - &frame.mean;
        let q = pinv_quadratic_form(pooled, &diff);
        if !q.is_finite() {
            return Err(Error::DegenerateFrame("non-finite spatial distance".into()));
        }
        Ok(RawNiqeScore(q.max(0.0).sqrt()))
    }
}

/// `v^T pinv(m) v` for symmetric `m`, discarding eigenvalues below the
/// pseudo-inverse tolerance.
fn pinv_quadratic_form(m: DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let largest = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let tol = PINV_TOLERANCE.max(largest * n as f64 * f64::EPSILON);
    let proj = eig.eigenvectors.transpose() * v;
    eig.eigenvalues
        .iter()
        .zip(proj.iter())
        .filter(|(l, _)| l.abs() > tol)
        .map(|(l, p)| p * p / l)
        .sum()
}

/// Scores one frame (luma or RGB) against `model`.
pub fn niqe_score(
    frame: &FrameImage,
    model: &NiqeModel,
    config: &NiqeConfig,
) -> Result<RawNiqeScore> {
    model.score(&super::niqe_features(&super::luma_frame(frame)?, config)?)
}

/// Fits a pristine model from sharp patches of `images`.
///
/// Images contributing no usable patch are skipped; fewer than
/// `min_images` contributing images is an error. The covariance uses the
/// population (`n`) normalisation.
pub fn fit_pristine_model(
    images: &[FrameImage],
    config: &NiqeConfig,
    min_images: usize,
) -> Result<NiqeModel> {
    use rayon::prelude::*;
    let per_image: Vec<Vec<Vec<f64>>> = images
        .par_iter()
        .map(|img| -> Result<Vec<Vec<f64>>> {
            let luma = super::luma_frame(img)?.luma_f64()?;
            let pf = match patch_features(&luma, img.width(), img.height(), config) {
                Ok(pf) => pf,
                Err(Error::DegenerateFrame(reason)) => {
                    log::warn!("skipping pristine image: {reason}");
                    return Ok(Vec::new());
                }
                Err(e) => return Err(e),
            };
            let fraction = config.sharpness_fraction;
            Ok(pf
                .select(PatchSelection::Sharpest { fraction })
                .into_iter()
                .map(<[f64]>::to_vec)
                .collect())
        })
        .collect::<Result<_>>()?;
    let contributing = per_image.iter().filter(|r| !r.is_empty()).count();
    if contributing < min_images {
        return Err(Error::CorpusTooSmall {
            found: contributing,
            required: min_images,
        });
    }
    let rows: Vec<&[f64]> = per_image.iter().flatten().map(Vec::as_slice).collect();
    if rows.len() < 2 {
        return Err(Error::InsufficientData(
            "pristine model needs at least two patches".into(),
        ));
    }
    debug_assert_eq!(rows[0].len(), FEATURES_PER_SCALE * config.scales);
    let (mean, mut cov) = mean_and_covariance(&rows, false);
    // Enforce exact symmetry against accumulated rounding.
    cov = (&cov + cov.transpose()) / 2.0;
    NiqeModel::new(mean, cov)
}
