use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    compute_corpus_stats, rescale, unified_index, AggregationStrategy, Orientation, Rescale,
    StatsFile,
};
use super::{CorpusStats, TAG_NIQE, TAG_SEMANTIC, TAG_TPQI};
use crate::error::{Error, Result};
use crate::ingest::VideoViews;
use crate::semantic::{
    differential_affinities, semantic_index_from_da, EmbeddingProvider, FrameKey, PromptPair,
};
use crate::spatial::{niqe_score, NiqeConfig, NiqeModel};
use crate::temporal::TemporalAnalyzer;

/// Every temporal triplet was static; the raw temporal score is the clamp floor.
pub const FLAG_STATIC_VIDEO: &str = "static-video";
/// The clip had fewer frames than the aesthetic view, so frames repeat.
pub const FLAG_AESTHETIC_REPEATED: &str = "aesthetic-frames-repeated";

/// Corpus-independent measurements of one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawVideoScore {
    pub video_id: String,
    /// Differential affinity of each prompt pair.
    pub da_values: Vec<f64>,
    /// Raw NIQE of each usable 1 fps frame.
    pub niqe_frames: Vec<f64>,
    pub tpqi: f64,
    pub lgn_mean_curvature: Option<f64>,
    pub v1_mean_curvature: Option<f64>,
    pub flags: Vec<String>,
}

impl RawVideoScore {
    pub fn raw_niqe(&self) -> f64 {
        self.niqe_frames.iter().sum::<f64>() / self.niqe_frames.len() as f64
    }

    pub fn da_sum(&self) -> f64 {
        self.da_values.iter().sum()
    }
}

/// Final per-video indexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoScore {
    pub video_id: String,
    pub q_a: f64,
    pub q_s: f64,
    pub q_t: f64,
    pub q_unified: f64,
    pub raw_niqe: f64,
    pub raw_tpqi: f64,
    pub da_values: Vec<f64>,
    pub flags: Vec<String>,
}

/// How per-frame spatial scores enter the corpus statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NiqePooling {
    /// Every sampled frame of every video is one sample.
    #[default]
    Frames,
    /// Each video contributes the mean of its frames.
    VideoMeans,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatsMode {
    /// Statistics of the scored set itself (needs at least two videos).
    TwoPass(NiqePooling),
    /// Previously exported statistics.
    Fixed(StatsFile),
}

/// Holds the models shared by every video of a run.
pub struct Scorer {
    provider: Arc<dyn EmbeddingProvider>,
    prompts: Vec<PromptPair>,
    niqe_model: NiqeModel,
    niqe_config: NiqeConfig,
    temporal: TemporalAnalyzer,
    semantic_scale: f64,
    provider_lock: Mutex<()>,
}

impl Scorer {
    pub fn new(
        provider: Arc<dyn EmbeddingProvider>,
        prompts: Vec<PromptPair>,
        niqe_model: NiqeModel,
    ) -> Result<Self> {
        if prompts.is_empty() {
            return Err(Error::EmptyInput("prompt pairs"));
        }
        for p in &prompts {
            if p.positive_embedding.dimension() != provider.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: provider.dimension(),
                    actual: p.positive_embedding.dimension(),
                });
            }
        }
        let niqe_config = NiqeConfig::default();
        if niqe_model.dimension() != niqe_config.feature_dimension() {
            return Err(Error::DimensionMismatch {
                expected: niqe_config.feature_dimension(),
                actual: niqe_model.dimension(),
            });
        }
        Ok(Self {
            provider,
            prompts,
            niqe_model,
            niqe_config,
            temporal: TemporalAnalyzer::default(),
            semantic_scale: 1.0,
            provider_lock: Mutex::new(()),
        })
    }

    pub fn with_niqe_config(mut self, config: NiqeConfig) -> Result<Self> {
        config.validate()?;
        if self.niqe_model.dimension() != config.feature_dimension() {
            return Err(Error::DimensionMismatch {
                expected: config.feature_dimension(),
                actual: self.niqe_model.dimension(),
            });
        }
        self.niqe_config = config;
        Ok(self)
    }

    pub fn with_temporal(mut self, analyzer: TemporalAnalyzer) -> Self {
        self.temporal = analyzer;
        self
    }

    /// Multiplier applied to differential affinities inside the logistic.
    pub fn with_semantic_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!(
                "semantic scale must be positive, got {scale}"
            )));
        }
        self.semantic_scale = scale;
        Ok(self)
    }

    pub fn semantic_scale(&self) -> f64 {
        self.semantic_scale
    }

    pub fn prompts(&self) -> &[PromptPair] {
        &self.prompts
    }

    fn embed_frames(
        &self,
        video_id: &str,
        views: &VideoViews,
    ) -> Result<Vec<crate::semantic::EmbeddingVector>> {
        let embed = |(i, f)| self.provider.embed_image(f, &FrameKey::new(video_id, i));
        if self.provider.is_reentrant() {
            views.aesthetic.par_iter().enumerate().map(embed).collect()
        } else {
            let _guard = self.provider_lock.lock().unwrap_or_else(|e| e.into_inner());
            views.aesthetic.iter().enumerate().map(embed).collect()
        }
    }

    /// Measures all three branches of one video.
    pub fn raw_score(&self, video_id: &str, views: &VideoViews) -> Result<RawVideoScore> {
        let mut flags = Vec::new();
        if views.native_frame_count < views.aesthetic.len() {
            flags.push(FLAG_AESTHETIC_REPEATED.to_string());
        }
        let (branches, temporal) = rayon::join(
            || -> Result<_> {
                let embeddings = self.embed_frames(video_id, views)?;
                let da = differential_affinities(&embeddings, &self.prompts)?;
                let niqe: Vec<Result<f64>> = views
                    .spatial
                    .par_iter()
                    .map(|f| niqe_score(f, &self.niqe_model, &self.niqe_config).map(|s| s.value()))
                    .collect();
                Ok((da, niqe))
            },
            || self.temporal.analyze(&views.temporal),
        );
        let (da_values, niqe) = branches?;
        let temporal = temporal?;

        let mut niqe_frames = Vec::with_capacity(niqe.len());
        let mut skipped = 0;
        for r in niqe {
            match r {
                Ok(v) => niqe_frames.push(v),
                Err(Error::DegenerateFrame(reason)) => {
                    log::warn!("{video_id}: skipping spatial frame: {reason}");
                    skipped += 1;
                }
                Err(e) => return Err(e),
            }
        }
        if niqe_frames.is_empty() {
            return Err(Error::DegenerateFrame(format!(
                "{video_id}: no sampled frame has spatial statistics"
            )));
        }
        if skipped > 0 {
            flags.push(format!("spatial-frames-skipped:{skipped}"));
        }
        let degenerate = temporal.lgn.degenerate + temporal.v1.degenerate;
        if temporal.tpqi.floored {
            flags.push(FLAG_STATIC_VIDEO.to_string());
        } else if degenerate > 0 {
            flags.push(format!("static-triplets:{degenerate}"));
        }
        Ok(RawVideoScore {
            video_id: video_id.to_string(),
            da_values,
            niqe_frames,
            tpqi: temporal.tpqi.value,
            lgn_mean_curvature: temporal.lgn.mean(),
            v1_mean_curvature: temporal.v1.mean(),
            flags,
        })
    }

    /// Rescales and fuses raw measurements with the given statistics.
    pub fn finalize(
        &self,
        raws: &[RawVideoScore],
        stats: &StatsFile,
        strategy: AggregationStrategy,
    ) -> Result<Vec<VideoScore>> {
        finalize_scores(raws, stats, strategy, self.semantic_scale)
    }
}

/// Statistics of a scored set; needs at least two videos.
pub fn corpus_stats(raws: &[RawVideoScore], pooling: NiqePooling) -> Result<StatsFile> {
    if raws.len() < 2 {
        return Err(Error::DegenerateStats {
            tag: "corpus".into(),
            reason: format!(
                "two-pass normalisation needs at least two videos, got {}; score single videos with \
                 fixed statistics exported from a reference set",
                raws.len()
            ),
        });
    }
    let niqe: Vec<f64> = match pooling {
        NiqePooling::Frames => raws
            .iter()
            .flat_map(|r| r.niqe_frames.iter().copied())
            .collect(),
        NiqePooling::VideoMeans => raws.iter().map(RawVideoScore::raw_niqe).collect(),
    };
    let tpqi: Vec<f64> = raws.iter().map(|r| r.tpqi).collect();
    let da: Vec<f64> = raws.iter().map(RawVideoScore::da_sum).collect();
    Ok(StatsFile {
        niqe: compute_corpus_stats(TAG_NIQE, &niqe)?,
        tpqi: compute_corpus_stats(TAG_TPQI, &tpqi)?,
        semantic: compute_corpus_stats(TAG_SEMANTIC, &da).ok(),
    })
}

fn semantic_component(
    raw: &RawVideoScore,
    stats: Option<&CorpusStats>,
    r: Rescale,
    scale: f64,
) -> Result<f64> {
    match r {
        // The semantic branch is already a sum of logistic values.
        Rescale::GaussianSigmoid => semantic_index_from_da(&raw.da_values, scale),
        Rescale::DirectRaw => Ok(raw.da_sum()),
        Rescale::LinearNormalize => {
            let stats = stats.ok_or_else(|| Error::DegenerateStats {
                tag: TAG_SEMANTIC.into(),
                reason: "linear normalisation needs semantic statistics".into(),
            })?;
            rescale(raw.da_sum(), stats, Orientation::HigherBetter, r)
        }
    }
}

/// Applies `strategy` to raw measurements.
pub fn finalize_scores(
    raws: &[RawVideoScore],
    stats: &StatsFile,
    strategy: AggregationStrategy,
    semantic_scale: f64,
) -> Result<Vec<VideoScore>> {
    raws.iter()
        .map(|raw| {
            let r = strategy.rescale;
            let q_a = semantic_component(raw, stats.semantic.as_ref(), r, semantic_scale)?;
            if raw.niqe_frames.is_empty() {
                return Err(Error::EmptyInput("spatial scores"));
            }
            let mut q_s = 0.0;
            for &q in &raw.niqe_frames {
                q_s += rescale(q, &stats.niqe, Orientation::LowerBetter, r)?;
            }
            q_s /= raw.niqe_frames.len() as f64;
            let q_t = rescale(raw.tpqi, &stats.tpqi, Orientation::LowerBetter, r)?;
            Ok(VideoScore {
                video_id: raw.video_id.clone(),
                q_a,
                q_s,
                q_t,
                q_unified: unified_index(q_a, q_s, q_t, strategy.combine),
                raw_niqe: raw.raw_niqe(),
                raw_tpqi: raw.tpqi,
                da_values: raw.da_values.clone(),
                flags: raw.flags.clone(),
            })
        })
        .collect()
}

/// Scores a set of already decoded videos; returns the scores and the
/// statistics used.
pub fn score_corpus(
    scorer: &Scorer,
    videos: &[(String, VideoViews)],
    strategy: AggregationStrategy,
    mode: &StatsMode,
) -> Result<(Vec<VideoScore>, StatsFile)> {
    if videos.is_empty() {
        return Err(Error::EmptyInput("corpus"));
    }
    let raws: Vec<RawVideoScore> = videos
        .par_iter()
        .map(|(id, v)| scorer.raw_score(id, v))
        .collect::<Result<_>>()?;
    let stats = match mode {
        StatsMode::TwoPass(pooling) => corpus_stats(&raws, *pooling)?,
        StatsMode::Fixed(s) => s.clone(),
    };
    Ok((scorer.finalize(&raws, &stats, strategy)?, stats))
}
