//! Temporal naturalness: curvature of a video's trajectory through
//! simulated early-vision response spaces. Natural motion traces straighter
//! paths than jitter, stutter or shake.

mod curvature;
mod transforms;

pub use curvature::{
    trajectory_curvature, CurvatureAccumulator, CurvatureSeries, PerceptualTrajectory,
    CURVATURE_EPSILON,
};
pub use transforms::{lgn_response, v1_response, LgnTransform, PerceptualTransform, V1Transform};

use std::sync::Arc;

use rayon::prelude::*;

use crate::aggregate::{rescale, CorpusStats, Orientation, Rescale};
use crate::error::{Error, Result};
use crate::FrameImage;

/// Log-mean curvature over both domains; lower is more natural.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawTpqiScore {
    pub value: f64,
    /// At least one domain had no measurable curvature and was clamped.
    pub floored: bool,
}

/// `(ln mean C_v1 + ln mean C_lgn) / 2` with both means clamped to at least
/// [`CURVATURE_EPSILON`].
pub fn tpqi_score(lgn: &CurvatureSeries, v1: &CurvatureSeries) -> RawTpqiScore {
    let clamp = |m: Option<f64>| match m {
        Some(m) if m >= CURVATURE_EPSILON => (m, false),
        _ => (CURVATURE_EPSILON, true),
    };
    let (a, fa) = clamp(v1.mean());
    let (b, fb) = clamp(lgn.mean());
    RawTpqiScore {
        value: (a.ln() + b.ln()) / 2.0,
        floored: fa || fb,
    }
}

/// `Q_T = 1 / (1 + exp((raw - mean) / std))`.
pub fn temporal_index(raw: f64, stats: &CorpusStats) -> Result<f64> {
    rescale(
        raw,
        stats,
        Orientation::LowerBetter,
        Rescale::GaussianSigmoid,
    )
}

/// Curvature series of both domains for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalAnalysis {
    pub lgn: CurvatureSeries,
    pub v1: CurvatureSeries,
    pub tpqi: RawTpqiScore,
}

/// Runs both transforms over a frame sequence and measures curvature.
#[derive(Clone)]
pub struct TemporalAnalyzer {
    lgn: Arc<dyn PerceptualTransform>,
    v1: Arc<dyn PerceptualTransform>,
}

impl Default for TemporalAnalyzer {
    fn default() -> Self {
        Self::new(
            Arc::new(LgnTransform::default()),
            Arc::new(V1Transform::default()),
        )
    }
}

impl std::fmt::Debug for TemporalAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TemporalAnalyzer")
            .field("lgn", &self.lgn.name())
            .field("v1", &self.v1.name())
            .finish()
    }
}

impl TemporalAnalyzer {
    pub fn new(lgn: Arc<dyn PerceptualTransform>, v1: Arc<dyn PerceptualTransform>) -> Self {
        Self { lgn, v1 }
    }

    /// Responses are computed in parallel in bounded chunks and folded into
    /// streaming accumulators in frame order.
    pub fn analyze(&self, frames: &[FrameImage]) -> Result<TemporalAnalysis> {
        if frames.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "temporal analysis needs at least 3 frames, got {}",
                frames.len()
            )));
        }
        let chunk = 2 * rayon::current_num_threads().max(1);
        let mut lgn = CurvatureAccumulator::new();
        let mut v1 = CurvatureAccumulator::new();
        for batch in frames.chunks(chunk) {
            let responses: Vec<(Vec<f64>, Vec<f64>)> = batch
                .par_iter()
                .map(|f| Ok((self.lgn.response(f)?, self.v1.response(f)?)))
                .collect::<Result<_>>()?;
            for (a, b) in responses {
                lgn.push(a)?;
                v1.push(b)?;
            }
        }
        let (lgn, v1) = (lgn.finish()?, v1.finish()?);
        let tpqi = tpqi_score(&lgn, &v1);
        Ok(TemporalAnalysis { lgn, v1, tpqi })
    }
}
