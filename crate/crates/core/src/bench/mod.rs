//! Benchmark harness: scores a manifest of videos and correlates the
//! indexes with mean opinion scores.

mod correlation;
mod manifest;
mod report;

pub use correlation::{fit_logistic4, fractional_ranks, logistic4, pearson, plcc, srcc, PlccFit};
pub use manifest::{video_id, DatasetManifest, ManifestEntry};
pub use report::{
    AblationRow, BenchmarkReport, ConfigEcho, ReportRow, SkippedEntry, StatsSummary, StrategyRow,
    Timing,
};

use std::time::Instant;

use rayon::prelude::*;

use crate::aggregate::{
    corpus_stats, finalize_scores, AggregationStrategy, NiqePooling, RawVideoScore, Scorer,
    StatsMode, VideoScore,
};
use crate::error::{Error, Result};
use crate::ingest::{views_from_source, VideoDecoder, ViewConfig};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub strategy: AggregationStrategy,
    pub plcc_fit: PlccFit,
    /// Videos decoded and measured concurrently.
    pub workers: usize,
    pub stats: StatsMode,
    /// Log and skip entries that fail to decode or score instead of aborting.
    pub skip_failures: bool,
    pub views: ViewConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            strategy: AggregationStrategy::default(),
            plcc_fit: PlccFit::None,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            stats: StatsMode::TwoPass(NiqePooling::Frames),
            skip_failures: true,
            views: ViewConfig::default(),
        }
    }
}

const COMPONENTS: [&str; 3] = ["semantic", "spatial", "temporal"];

fn correlations(pred: &[f64], mos: &[f64], fit: PlccFit) -> (Option<f64>, Option<f64>) {
    (srcc(pred, mos).ok(), plcc(pred, mos, fit).ok())
}

/// The seven non-empty subsets of the three indexes under the default
/// (sigmoid, addition) strategy.
pub fn ablation_grid(scores: &[VideoScore], mos: &[f64], fit: PlccFit) -> Vec<AblationRow> {
    (1u8..8)
        .map(|mask| {
            let pred: Vec<f64> = scores
                .iter()
                .map(|s| {
                    [s.q_a, s.q_s, s.q_t]
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, v)| v)
                        .sum()
                })
                .collect();
            let components = COMPONENTS
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| *c)
                .collect::<Vec<_>>();
            let (srcc, plcc) = correlations(&pred, mos, fit);
            AblationRow {
                components: components.join("+"),
                srcc,
                plcc,
            }
        })
        .collect()
}

/// Scores every manifest entry and assembles the report.
pub fn run_benchmark(
    manifest: &DatasetManifest,
    config: &BenchConfig,
    scorer: &Scorer,
    decoder: &dyn VideoDecoder,
) -> Result<BenchmarkReport> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let measured: Vec<Result<RawVideoScore>> = pool.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| {
                let mut source = decoder.open(&e.video_path)?;
                let views = views_from_source(source.as_mut(), &config.views)?;
                scorer.raw_score(&e.video_id, &views)
            })
            .collect()
    });
    let measure_seconds = started.elapsed().as_secs_f64();

    let mut raws = Vec::new();
    let mut mos = Vec::new();
    let mut paths = Vec::new();
    let mut skipped = Vec::new();
    for (entry, result) in manifest.entries.iter().zip(measured) {
        match result {
            Ok(r) => {
                raws.push(r);
                mos.push(entry.mos);
                paths.push(entry.video_path.clone());
            }
            Err(e) if config.skip_failures => {
                log::warn!("skipping {}: {e}", entry.video_path.display());
                skipped.push(SkippedEntry {
                    video_path: entry.video_path.clone(),
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    if raws.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} of {} manifest entries could be scored",
            raws.len(),
            manifest.entries.len()
        )));
    }
    let (stats, stats_mode) = match &config.stats {
        StatsMode::TwoPass(pooling) => (
            corpus_stats(&raws, *pooling)?,
            format!("two-pass ({pooling:?})"),
        ),
        StatsMode::Fixed(s) => (s.clone(), "fixed".to_string()),
    };
    let scale = scorer.semantic_scale();
    let scores = finalize_scores(&raws, &stats, config.strategy, scale)?;
    let unified: Vec<f64> = scores.iter().map(|s| s.q_unified).collect();
    let srcc_value = srcc(&unified, &mos)?;
    let plcc_value = plcc(&unified, &mos, config.plcc_fit)?;

    let default_scores = if config.strategy == AggregationStrategy::default() {
        scores.clone()
    } else {
        finalize_scores(&raws, &stats, AggregationStrategy::default(), scale)?
    };
    let ablation = ablation_grid(&default_scores, &mos, config.plcc_fit);
    let strategies = AggregationStrategy::ALL
        .iter()
        .map(|&strategy| {
            let (srcc, plcc) = match finalize_scores(&raws, &stats, strategy, scale) {
                Ok(s) => correlations(
                    &s.iter().map(|v| v.q_unified).collect::<Vec<_>>(),
                    &mos,
                    config.plcc_fit,
                ),
                Err(_) => (None, None),
            };
            StrategyRow {
                strategy: strategy.name().into(),
                srcc,
                plcc,
            }
        })
        .collect();

    let rows = scores
        .into_iter()
        .zip(paths)
        .zip(&mos)
        .map(|((score, video_path), &mos)| ReportRow {
            video_path,
            mos,
            score,
        })
        .collect();
    let report = BenchmarkReport {
        dataset: manifest.name.clone(),
        manifest_entries: manifest.entries.len(),
        rows,
        srcc: srcc_value,
        plcc: plcc_value,
        ablation,
        strategies,
        skipped,
        stats: StatsSummary::from_file(&stats),
        config: ConfigEcho {
            strategy: config.strategy.name().into(),
            plcc_fit: config.plcc_fit.name().into(),
            stats_mode,
            workers: config.workers,
            semantic_scale: scale,
            prompts: scorer
                .prompts()
                .iter()
                .map(|p| (p.positive_text.clone(), p.negative_text.clone()))
                .collect(),
        },
        timing: Timing {
            measure_seconds,
            total_seconds: started.elapsed().as_secs_f64(),
        },
    };
    report.validate()?;
    Ok(report)
}
