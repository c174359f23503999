use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Resolved path (relative entries are taken relative to the manifest).
    pub video_path: PathBuf,
    /// Identifier used in reports and embedding lookups: the file stem.
    pub video_id: String,
    pub mos: f64,
}

/// Videos with mean opinion scores.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
}

/// File stem of a video path, used as its identifier.
pub fn video_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, entries: Vec<ManifestEntry>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a manifest needs at least 2 entries, got {}",
                entries.len()
            )));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !e.mos.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite MOS for {}",
                    e.video_path.display()
                )));
            }
            if !seen.insert(e.video_id.as_str()) {
                return Err(Error::invalid(format!(
                    "duplicate video id `{}` (file stems must be unique)",
                    e.video_id
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            entries,
        })
    }

    /// Reads `video_path,mos` rows; a first row whose MOS column is not a
    /// number is treated as a header, `#` lines are comments.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_path(path)?;
        let mut entries = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = record.position().map_or(i + 1, |p| p.line() as usize);
            if record.iter().all(str::is_empty) {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected `video_path,mos`, found {} fields", record.len()),
                ));
            }
            let mos = match record[1].parse::<f64>() {
                Ok(m) => m,
                Err(_) if entries.is_empty() && i == 0 => continue,
                Err(_) => {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("bad MOS `{}`", &record[1]),
                    ))
                }
            };
            let rel = PathBuf::from(&record[0]);
            let video_path = if rel.is_absolute() {
                rel
            } else {
                base.join(rel)
            };
            entries.push(ManifestEntry {
                video_id: video_id(&video_path),
                video_path,
                mos,
            });
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::new(name, entries)
    }

    /// Smallest and largest MOS.
    pub fn mos_scale(&self) -> (f64, f64) {
        self.entries
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                (lo.min(e.mos), hi.max(e.mos))
            })
    }
}
