//! The `ouvqa` command line: score videos, run benchmarks against mean
//! opinion scores, fit the pristine NIQE model and export corpus statistics.

pub mod decode;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ouvqa_core::aggregate::{
    score_corpus, AggregationStrategy, NiqePooling, Scorer, StatsFile, StatsMode,
};
use ouvqa_core::bench::{run_benchmark, BenchConfig, DatasetManifest, PlccFit};
use ouvqa_core::ingest::{views_from_source, VideoDecoder, VideoViews, ViewConfig};
use ouvqa_core::semantic::{embed_prompts, EmbeddingProvider, FixtureProvider, PromptSpec};
use ouvqa_core::spatial::{fit_pristine_model, NiqeConfig, NiqeModel};
use ouvqa_core::temporal::TemporalAnalyzer;
use ouvqa_core::FrameImage;
use ouvqa_runtime::OnnxProvider;

pub use decode::{AutoDecoder, FfmpegDecoder, Y4mDecoder};

/// Where frame and prompt embeddings come from.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingSource {
    /// An exported ONNX bundle directory.
    Runtime(PathBuf),
    /// Precomputed fixture records (a file or a directory of files).
    Fixtures(PathBuf),
}

impl FromStr for EmbeddingSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, path) = s
            .split_once(':')
            .ok_or_else(|| format!("expected runtime:PATH or fixtures:PATH, got `{s}`"))?;
        if path.is_empty() {
            return Err(format!("missing path in `{s}`"));
        }
        match kind {
            "runtime" => Ok(Self::Runtime(path.into())),
            "fixtures" => Ok(Self::Fixtures(path.into())),
            other => Err(format!(
                "unknown embedding source `{other}` (expected runtime or fixtures)"
            )),
        }
    }
}

impl EmbeddingSource {
    pub fn open(&self) -> anyhow::Result<Arc<dyn EmbeddingProvider>> {
        Ok(match self {
            Self::Runtime(dir) => Arc::new(
                OnnxProvider::load(dir)
                    .with_context(|| format!("loading embedding bundle {}", dir.display()))?,
            ),
            Self::Fixtures(path) => Arc::new(
                FixtureProvider::load(path)
                    .with_context(|| format!("loading fixture embeddings {}", path.display()))?,
            ),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolingArg {
    Frames,
    VideoMeans,
}

impl From<PoolingArg> for NiqePooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::Frames => NiqePooling::Frames,
            PoolingArg::VideoMeans => NiqePooling::VideoMeans,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ouvqa",
    version,
    about = "Opinion-unaware video quality assessment"
)]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score videos and print their indexes as JSON.
    Score(ScoreArgs),
    /// Score a MOS-annotated manifest and correlate with opinion scores.
    Bench(BenchArgs),
    /// Fit the pristine NIQE model from a corpus of natural images (PNG).
    FitNiqe(FitNiqeArgs),
    /// Compute corpus statistics over a set of videos for later fixed-stats scoring.
    ExportStats(ExportStatsArgs),
    /// Print the per-triplet curvature series of one video.
    CurvatureDump(CurvatureDumpArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Embedding source: `runtime:BUNDLE_DIR` or `fixtures:PATH`.
    #[arg(long)]
    pub embeddings: EmbeddingSource,
    /// Prompt pairs, one `positive<TAB>negative` per line.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    /// Pristine NIQE model file (defaults to the bundled model).
    #[arg(long)]
    pub niqe_model: Option<PathBuf>,
    /// Aggregation strategy: sigmoid-add, sigmoid-mul, linear-add or direct-add.
    #[arg(long, default_value = "sigmoid-add")]
    pub aggregation: AggregationStrategy,
    /// Logit multiplier applied to differential affinities.
    #[arg(long, default_value_t = 1.0)]
    pub semantic_scale: f64,
}

impl ModelArgs {
    pub fn scorer(&self) -> anyhow::Result<Scorer> {
        let provider = self.embeddings.open()?;
        let specs = match &self.prompts {
            Some(p) => PromptSpec::parse_file(p)
                .with_context(|| format!("reading prompts {}", p.display()))?,
            None => PromptSpec::defaults(),
        };
        let pairs = embed_prompts(provider.as_ref(), &specs).context("embedding prompts")?;
        let model = match &self.niqe_model {
            Some(p) => {
                NiqeModel::load(p).with_context(|| format!("reading NIQE model {}", p.display()))?
            }
            None => NiqeModel::pristine_default(),
        };
        Ok(Scorer::new(provider, pairs, model)?.with_semantic_scale(self.semantic_scale)?)
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Corpus statistics exported by `export-stats`.
    #[arg(
        long,
        conflicts_with = "two_pass",
        required_unless_present = "two_pass"
    )]
    pub stats: Option<PathBuf>,
    /// Normalise against the statistics of the videos being scored (needs two or more).
    #[arg(long)]
    pub two_pass: bool,
    #[arg(long, value_enum, default_value = "frames")]
    pub niqe_pooling: PoolingArg,
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(required = true)]
    pub videos: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// CSV of `video_path,mos` rows.
    #[arg(long)]
    pub manifest: PathBuf,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-video rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write index-vs-MOS scatter plots (SVG) into this directory.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// PLCC mapping: none or logistic4.
    #[arg(long, default_value = "none")]
    pub plcc_fit: PlccFit,
    /// Videos processed concurrently (defaults to the number of CPUs).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Fixed corpus statistics; otherwise the manifest's own statistics are used.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "frames")]
    pub niqe_pooling: PoolingArg,
    /// Abort on the first video that fails instead of skipping it.
    #[arg(long)]
    pub fail_fast: bool,
}

#[derive(Debug, Args)]
pub struct FitNiqeArgs {
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    /// Minimum number of images that must contribute patches.
    #[arg(long, default_value_t = 10)]
    pub min_images: usize,
    /// PNG images, or directories searched (non-recursively) for them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportStatsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output statistics file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "frames")]
    pub niqe_pooling: PoolingArg,
    /// Take videos from a manifest (MOS values are ignored).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    pub videos: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvatureDumpArgs {
    pub video: PathBuf,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_views(decoder: &dyn VideoDecoder, path: &Path) -> anyhow::Result<VideoViews> {
    let mut source = decoder
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    views_from_source(source.as_mut(), &ViewConfig::default())
        .with_context(|| format!("decoding {}", path.display()))
}

fn score_videos(
    scorer: &Scorer,
    paths: &[PathBuf],
    strategy: AggregationStrategy,
    mode: &StatsMode,
) -> anyhow::Result<(Vec<ouvqa_core::aggregate::VideoScore>, StatsFile)> {
    let decoder = AutoDecoder::default();
    let mut videos = Vec::with_capacity(paths.len());
    for path in paths {
        let id = ouvqa_core::bench::video_id(path);
        if videos.iter().any(|(other, _)| other == &id) {
            bail!("duplicate video id `{id}`");
        }
        videos.push((id, load_views(&decoder, path)?));
    }
    Ok(score_corpus(scorer, &videos, strategy, mode)?)
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn cmd_score(args: &ScoreArgs) -> anyhow::Result<()> {
    let mode = match &args.stats {
        Some(p) => StatsMode::Fixed(
            StatsFile::load(p).with_context(|| format!("reading stats {}", p.display()))?,
        ),
        None => StatsMode::TwoPass(args.niqe_pooling.into()),
    };
    let scorer = args.model.scorer()?;
    let (scores, _) = score_videos(&scorer, &args.videos, args.model.aggregation, &mode)?;
    let mut json = serde_json::to_string_pretty(&scores)?;
    json.push('\n');
    write_output(args.out.as_deref(), &json)
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let manifest = DatasetManifest::load(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let stats = match &args.stats {
        Some(p) => StatsMode::Fixed(
            StatsFile::load(p).with_context(|| format!("reading stats {}", p.display()))?,
        ),
        None => StatsMode::TwoPass(args.niqe_pooling.into()),
    };
    let defaults = BenchConfig::default();
    let config = BenchConfig {
        strategy: args.model.aggregation,
        plcc_fit: args.plcc_fit,
        workers: args.workers.unwrap_or(defaults.workers),
        stats,
        skip_failures: !args.fail_fast,
        ..defaults
    };
    let scorer = args.model.scorer()?;
    let report = run_benchmark(&manifest, &config, &scorer, &AutoDecoder::default())?;
    report
        .validate()
        .context("benchmark report failed validation")?;
    report
        .save_json(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(csv) = &args.csv {
        report
            .save_csv(csv)
            .with_context(|| format!("writing {}", csv.display()))?;
    }
    if let Some(dir) = &args.svg {
        fs::create_dir_all(dir)?;
        report
            .save_scatter_svgs(dir)
            .with_context(|| format!("writing plots to {}", dir.display()))?;
    }
    log::info!(
        "{}: {} videos scored, {} skipped, SRCC {:.4}, PLCC {:.4}",
        report.dataset,
        report.rows.len(),
        report.skipped.len(),
        report.srcc,
        report.plcc
    );
    Ok(())
}

fn collect_images(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn cmd_fit_niqe(args: &FitNiqeArgs) -> anyhow::Result<()> {
    let files = collect_images(&args.inputs)?;
    if files.is_empty() {
        bail!("no input images found");
    }
    let images = files
        .iter()
        .map(|f| FrameImage::open(f).with_context(|| format!("reading {}", f.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let model = fit_pristine_model(&images, &NiqeConfig::default(), args.min_images)?;
    model
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    log::info!(
        "fitted {}-dimensional model from {} images",
        model.dimension(),
        images.len()
    );
    Ok(())
}

fn cmd_export_stats(args: &ExportStatsArgs) -> anyhow::Result<()> {
    let mut videos = args.videos.clone();
    if let Some(m) = &args.manifest {
        let manifest = DatasetManifest::load(m)
            .with_context(|| format!("reading manifest {}", m.display()))?;
        videos.extend(manifest.entries.into_iter().map(|e| e.video_path));
    }
    if videos.len() < 2 {
        bail!(
            "corpus statistics need at least two videos, got {}",
            videos.len()
        );
    }
    let scorer = args.model.scorer()?;
    let mode = StatsMode::TwoPass(args.niqe_pooling.into());
    let (_, stats) = score_videos(&scorer, &videos, args.model.aggregation, &mode)?;
    stats
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn cmd_curvature_dump(args: &CurvatureDumpArgs) -> anyhow::Result<()> {
    let views = load_views(&AutoDecoder::default(), &args.video)?;
    let analysis = TemporalAnalyzer::default().analyze(&views.temporal)?;
    let mut text = String::new();
    for (tag, series) in [("lgn", &analysis.lgn), ("v1", &analysis.v1)] {
        text.push_str(tag);
        for v in &series.values {
            text.push(' ');
            text.push_str(&v.to_string());
        }
        text.push('\n');
    }
    write_output(args.out.as_deref(), &text)
}

pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Score(a) => cmd_score(a),
        Command::Bench(a) => cmd_bench(a),
        Command::FitNiqe(a) => cmd_fit_niqe(a),
        Command::ExportStats(a) => cmd_export_stats(a),
        Command::CurvatureDump(a) => cmd_curvature_dump(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 on success, 2 for usage errors and 1
/// when processing fails.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default())
        .filter_level(level)
        .parse_default_env()
        .try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_source_parsing() {
        assert_eq!(
            "runtime:/a/b".parse(),
            Ok(EmbeddingSource::Runtime("/a/b".into()))
        );
        assert_eq!(
            "fixtures:x.txt".parse(),
            Ok(EmbeddingSource::Fixtures("x.txt".into()))
        );
        assert!("fixtures:".parse::<EmbeddingSource>().is_err());
        assert!("model:x".parse::<EmbeddingSource>().is_err());
        assert!("x.txt".parse::<EmbeddingSource>().is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(
            run(["ouvqa", "score", "--embeddings", "fixtures:e.txt", "v.y4m"]),
            2
        );
        assert_eq!(run(["ouvqa", "bench"]), 2);
        assert_eq!(run(["ouvqa", "nonsense"]), 2);
        assert_eq!(
            run([
                "ouvqa",
                "score",
                "--embeddings",
                "bogus",
                "--two-pass",
                "v.y4m"
            ]),
            2
        );
        assert_eq!(run(["ouvqa", "--help"]), 0);
    }

    #[test]
    fn processing_errors_exit_with_one() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("missing.csv");
        let out = dir.path().join("r.json");
        let code = run([
            "ouvqa".into(),
            "bench".into(),
            "--embeddings".into(),
            format!("fixtures:{}", dir.path().join("none.txt").display()),
            "--manifest".into(),
            missing.display().to_string(),
            "--out".into(),
            out.display().to_string(),
        ]);
        assert_eq!(code, 1);
        assert!(!out.exists());
    }
}
