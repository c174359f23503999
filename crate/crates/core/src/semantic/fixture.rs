//! Precomputed embeddings: one record per line, `id D v1 ... vD`, values
//! read at 32-bit precision. Ids may contain spaces (prompt texts); the
//! record is split from the right using the declared dimension.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::semantic::{EmbeddingProvider, EmbeddingVector, FrameKey};
use crate::{Error, FrameImage, Result};

#[derive(Debug, Clone, Default)]
pub struct FixtureEmbeddings {
    dimension: Option<usize>,
    records: HashMap<String, EmbeddingVector>,
}

fn parse_record(line: &str) -> Option<(String, Vec<f64>)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    // the dimension token sits right before the last D values
    for k in 1..tokens.len() {
        if let Ok(d) = tokens[k].parse::<usize>() {
            if d > 0 && tokens.len() - k - 1 == d {
                let values = tokens[k + 1..]
                    .iter()
                    .map(|t| t.parse::<f32>().ok().map(f64::from))
                    .collect::<Option<Vec<_>>>()?;
                return Some((tokens[..k].join(" "), values));
            }
        }
    }
    None
}

impl FixtureEmbeddings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingVector> {
        self.records.get(id)
    }

    /// Adds a record. Re-inserting an id with different values is an error.
    pub fn insert(&mut self, id: impl Into<String>, embedding: EmbeddingVector) -> Result<()> {
        let id = id.into();
        if id.trim().is_empty() || id.trim() != id {
            return Err(Error::invalid(format!(
                "fixture id `{id}` must be non-empty without outer spaces"
            )));
        }
        match self.dimension {
            Some(d) if d != embedding.dimension() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: embedding.dimension(),
                })
            }
            _ => self.dimension = Some(embedding.dimension()),
        }
        if let Some(prev) = self.records.get(&id) {
            if prev != &embedding {
                return Err(Error::invalid(format!(
                    "conflicting records for fixture id `{id}`"
                )));
            }
        }
        self.records.insert(id, embedding);
        Ok(())
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Self> {
        let mut out = Self::new();
        out.extend_from_str(text, path)?;
        Ok(out)
    }

    fn extend_from_str(&mut self, text: &str, path: &Path) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (id, values) = parse_record(line)
                .ok_or_else(|| Error::parse(path, n + 1, "expected `id D v1 ... vD`"))?;
            let emb = EmbeddingVector::new(values)
                .map_err(|e| Error::parse(path, n + 1, e.to_string()))?;
            self.insert(id, emb)
                .map_err(|e| Error::parse(path, n + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// Loads one fixture file, or every regular file in a directory (sorted
    /// by name).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut out = Self::new();
        if path.is_dir() {
            let mut files: Vec<_> = fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            for file in files {
                out.extend_from_str(&fs::read_to_string(&file)?, &file)?;
            }
        } else {
            out.extend_from_str(&fs::read_to_string(path)?, path)?;
        }
        if out.is_empty() {
            return Err(Error::parse(path, 1, "no embedding records"));
        }
        Ok(out)
    }

    /// Serialises records sorted by id.
    pub fn to_text(&self) -> String {
        let mut ids: Vec<&String> = self.records.keys().collect();
        ids.sort();
        let mut out = String::new();
        for id in ids {
            let e = &self.records[id];
            let _ = write!(out, "{id} {}", e.dimension());
            for v in e.values() {
                let _ = write!(out, " {}", *v as f32);
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Serves embeddings from fixture records. Frames resolve `video#index`
/// first and fall back to a per-video `video` record.
#[derive(Debug, Clone)]
pub struct FixtureProvider {
    fixtures: FixtureEmbeddings,
    dimension: usize,
}

impl FixtureProvider {
    pub fn new(fixtures: FixtureEmbeddings) -> Result<Self> {
        let dimension = fixtures.dimension().ok_or(Error::EmptyInput(
            "fixture provider needs at least one record",
        ))?;
        Ok(Self {
            fixtures,
            dimension,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(FixtureEmbeddings::load(path)?)
    }

    pub fn fixtures(&self) -> &FixtureEmbeddings {
        &self.fixtures
    }
}

impl EmbeddingProvider for FixtureProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_image(&self, _frame: &FrameImage, key: &FrameKey) -> Result<EmbeddingVector> {
        let id = key.record_id();
        self.fixtures
            .get(&id)
            .or_else(|| self.fixtures.get(&key.video_id))
            .cloned()
            .ok_or(Error::MissingEmbedding(id))
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector> {
        self.fixtures
            .get(text)
            .cloned()
            .ok_or_else(|| Error::MissingEmbedding(text.to_string()))
    }
}
