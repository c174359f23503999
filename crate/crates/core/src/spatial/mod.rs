//! Spatial naturalness: NIQE distances of 1 fps frames from a pristine
//! multivariate-Gaussian model of natural-scene statistics.

mod features;
mod fit;
mod model;
mod mscn;

pub use features::{
    min_frame_side, niqe_features, patch_features, FrameStatistics, PatchFeatures, PatchSelection,
    FEATURES_PER_SCALE,
};
pub use fit::{fit_aggd, fit_ggd, AggdFit, GgdFit, MIN_FIT_SAMPLES};
pub use model::{fit_pristine_model, niqe_score, NiqeModel, RawNiqeScore};
pub use mscn::{mscn, MscnField};

use crate::aggregate::{rescale, CorpusStats, Orientation, Rescale};
use crate::error::{Error, Result};
use crate::ingest::to_luma;
use crate::FrameImage;

/// NIQE constants; the defaults follow the original algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct NiqeConfig {
    pub window_size: usize,
    pub window_sigma: f64,
    pub stabilizer: f64,
    pub patch_size: usize,
    pub sharpness_fraction: f64,
    pub scales: usize,
}

impl Default for NiqeConfig {
    fn default() -> Self {
        Self {
            window_size: 7,
            window_sigma: 7.0 / 6.0,
            stabilizer: 1.0,
            patch_size: 96,
            sharpness_fraction: 0.75,
            scales: 2,
        }
    }
}

impl NiqeConfig {
    pub fn feature_dimension(&self) -> usize {
        FEATURES_PER_SCALE * self.scales
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.window_size % 2 == 1
            && self.window_sigma > 0.0
            && self.stabilizer > 0.0
            && self.scales >= 1
            && self.scales <= 4
            && self.patch_size.is_multiple_of(1 << (self.scales - 1))
            && self.patch_size >> (self.scales - 1) >= self.window_size
            && (0.0..=1.0).contains(&self.sharpness_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "inconsistent NIQE configuration {self:?}"
            )))
        }
    }
}

pub(crate) fn luma_frame(frame: &FrameImage) -> Result<FrameImage> {
    if frame.is_luma() {
        Ok(frame.clone())
    } else {
        to_luma(frame)
    }
}

/// Raw NIQE score of every frame of a spatial view.
pub fn frame_scores(
    frames: &[FrameImage],
    model: &NiqeModel,
    config: &NiqeConfig,
) -> Result<Vec<RawNiqeScore>> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("spatial view"));
    }
    frames
        .iter()
        .map(|f| niqe_score(f, model, config))
        .collect()
}

/// `Q_S`: mean over frames of `1 / (1 + exp((q_i - mean) / std))`.
pub fn spatial_index(raw_scores: &[RawNiqeScore], stats: &CorpusStats) -> Result<f64> {
    if raw_scores.is_empty() {
        return Err(Error::EmptyInput("spatial scores"));
    }
    let mut total = 0.0;
    for s in raw_scores {
        total += rescale(
            s.value(),
            stats,
            Orientation::LowerBetter,
            Rescale::GaussianSigmoid,
        )?;
    }
    Ok(total / raw_scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_consistent() {
        let c = NiqeConfig::default();
        c.validate().unwrap();
        assert_eq!(c.feature_dimension(), 36);
        assert!(NiqeConfig {
            patch_size: 9,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(NiqeConfig {
            window_size: 6,
            ..c
        }
        .validate()
        .is_err());
    }

    #[test]
    fn spatial_index_midpoint_and_orientation() {
        let stats = CorpusStats::new("niqe", 4.0, 2.0, 10).unwrap();
        let at_mean = [RawNiqeScore::from_value(4.0); 3];
        assert!((spatial_index(&at_mean, &stats).unwrap() - 0.5).abs() < 1e-15);
        let worse = [RawNiqeScore::from_value(6.0)];
        assert!((spatial_index(&worse, &stats).unwrap() - 0.268_941_421_369_995_1).abs() < 1e-12);
        assert!(spatial_index(&[], &stats).is_err());
    }
}
