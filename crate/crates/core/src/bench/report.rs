use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::{StatsFile, VideoScore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub video_path: PathBuf,
    pub mos: f64,
    #[serde(flatten)]
    pub score: VideoScore,
}

/// Correlation of one combination of indexes with the MOS. `None` when the
/// combination is constant over the scored set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// `+`-joined subset of `semantic`, `spatial`, `temporal`.
    pub components: String,
    pub srcc: Option<f64>,
    pub plcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: String,
    pub srcc: Option<f64>,
    pub plcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub video_path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub tag: String,
    pub mean: f64,
    pub std: f64,
    pub sample_count: usize,
}

impl StatsSummary {
    pub fn from_file(stats: &StatsFile) -> Vec<Self> {
        [
            Some(&stats.niqe),
            Some(&stats.tpqi),
            stats.semantic.as_ref(),
        ]
        .into_iter()
        .flatten()
        .map(|s| Self {
            tag: s.metric_tag().into(),
            mean: s.mean(),
            std: s.std(),
            sample_count: s.sample_count(),
        })
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub strategy: String,
    pub plcc_fit: String,
    pub stats_mode: String,
    pub workers: usize,
    pub semantic_scale: f64,
    pub prompts: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub measure_seconds: f64,
    pub total_seconds: f64,
}

/// Reads one index off a scored video.
type IndexOf = fn(&VideoScore) -> f64;

/// Result of a benchmark run, serialised as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub manifest_entries: usize,
    pub rows: Vec<ReportRow>,
    pub srcc: f64,
    pub plcc: f64,
    pub ablation: Vec<AblationRow>,
    pub strategies: Vec<StrategyRow>,
    pub skipped: Vec<SkippedEntry>,
    pub stats: Vec<StatsSummary>,
    pub config: ConfigEcho,
    pub timing: Timing,
}

fn in_unit_range(v: f64) -> bool {
    v.is_finite() && (-1.0..=1.0).contains(&v)
}

impl BenchmarkReport {
    /// Checks the structural invariants of a report.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(format!("invalid report: {m}")));
        if !in_unit_range(self.srcc) || !in_unit_range(self.plcc) {
            return fail(format!(
                "correlations out of range (srcc {}, plcc {})",
                self.srcc, self.plcc
            ));
        }
        if self.rows.len() + self.skipped.len() != self.manifest_entries {
            return fail(format!(
                "{} rows + {} skipped != {} manifest entries",
                self.rows.len(),
                self.skipped.len(),
                self.manifest_entries
            ));
        }
        if self.rows.len() < 2 {
            return fail("fewer than two scored rows".into());
        }
        if self.ablation.len() != 7 {
            return fail(format!(
                "ablation grid has {} rows, expected 7",
                self.ablation.len()
            ));
        }
        let corr = self
            .ablation
            .iter()
            .flat_map(|a| [a.srcc, a.plcc])
            .chain(self.strategies.iter().flat_map(|s| [s.srcc, s.plcc]));
        if corr.flatten().any(|v| !in_unit_range(v)) {
            return fail("ablation or strategy correlation out of range".into());
        }
        for r in &self.rows {
            let s = &r.score;
            if ![
                s.q_a,
                s.q_s,
                s.q_t,
                s.q_unified,
                s.raw_niqe,
                s.raw_tpqi,
                r.mos,
            ]
            .iter()
            .all(|v| v.is_finite())
            {
                return fail(format!("non-finite value in row {}", s.video_id));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// One CSV line per scored video.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "video_id",
            "video_path",
            "mos",
            "q_a",
            "q_s",
            "q_t",
            "q_unified",
            "raw_niqe",
            "raw_tpqi",
            "da_values",
            "flags",
        ])?;
        for r in &self.rows {
            let s = &r.score;
            let da = s
                .da_values
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                s.video_id.clone(),
                r.video_path.display().to_string(),
                r.mos.to_string(),
                s.q_a.to_string(),
                s.q_s.to_string(),
                s.q_t.to_string(),
                s.q_unified.to_string(),
                s.raw_niqe.to_string(),
                s.raw_tpqi.to_string(),
                da,
                s.flags.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes one `<metric>.svg` scatter plot of the metric against MOS for
    /// each of the four indexes; returns the written paths.
    pub fn save_scatter_svgs(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let metrics: [(&str, IndexOf); 4] = [
            ("q_unified", |s| s.q_unified),
            ("q_a", |s| s.q_a),
            ("q_s", |s| s.q_s),
            ("q_t", |s| s.q_t),
        ];
        let mut written = Vec::new();
        for (name, get) in metrics {
            let points: Vec<(f64, f64)> =
                self.rows.iter().map(|r| (get(&r.score), r.mos)).collect();
            let path = dir.join(format!("{name}.svg"));
            std::fs::write(
                &path,
                scatter_svg(&format!("{} — {name} vs MOS", self.dataset), name, &points),
            )?;
            written.push(path);
        }
        Ok(written)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn scatter_svg(title: &str, x_label: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const M: f64 = 50.0;
    let range = |it: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = range(&mut points.iter().map(|p| p.0));
    let (y0, y1) = range(&mut points.iter().map(|p| p.1));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#,
        H - M
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">MOS</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, x) in [(x0, M), (x1, W - M)] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{v:.3}</text>"#,
            H - M + 15.0
        );
    }
    for (v, y) in [(y0, H - M), (y1, M)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end">{v:.2}</text>"#,
            M - 4.0
        );
    }
    for &(x, y) in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            sx(x),
            sy(y)
        );
    }
    s.push_str("</svg>\n");
    s
}
