use std::fs;
use std::path::Path;

use crate::semantic::{EmbeddingProvider, EmbeddingVector};
use crate::{Error, Result};

/// Antonym prompt texts, before embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub positive: String,
    pub negative: String,
}

impl PromptSpec {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Result<Self> {
        let (positive, negative) = (positive.into(), negative.into());
        if positive.trim().is_empty() || negative.trim().is_empty() {
            return Err(Error::invalid("prompt texts must be non-empty"));
        }
        Ok(Self { positive, negative })
    }

    /// `high quality / low quality` and `a good photo / a bad photo`.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self::new("high quality", "low quality").expect("non-empty"),
            Self::new("a good photo", "a bad photo").expect("non-empty"),
        ]
    }

    /// One `positive<TAB>negative` pair per line; blank lines and `#`
    /// comments are skipped.
    pub fn parse_file(path: impl AsRef<Path>) -> Result<Vec<Self>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split('\t');
            let (pos, neg) = match (parts.next(), parts.next(), parts.next()) {
                (Some(p), Some(n), None) => (p.trim(), n.trim()),
                _ => {
                    return Err(Error::parse(
                        path,
                        n + 1,
                        "expected `positive<TAB>negative`",
                    ))
                }
            };
            pairs.push(Self::new(pos, neg).map_err(|e| Error::parse(path, n + 1, e.to_string()))?);
        }
        if pairs.is_empty() {
            return Err(Error::parse(path, 1, "no prompt pairs"));
        }
        Ok(pairs)
    }
}

/// A prompt pair together with its text embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptPair {
    pub positive_text: String,
    pub negative_text: String,
    pub positive_embedding: EmbeddingVector,
    pub negative_embedding: EmbeddingVector,
}

impl PromptPair {
    pub fn new(
        positive_text: impl Into<String>,
        negative_text: impl Into<String>,
        positive_embedding: EmbeddingVector,
        negative_embedding: EmbeddingVector,
    ) -> Result<Self> {
        let spec = PromptSpec::new(positive_text, negative_text)?;
        if positive_embedding.dimension() != negative_embedding.dimension() {
            return Err(Error::DimensionMismatch {
                expected: positive_embedding.dimension(),
                actual: negative_embedding.dimension(),
            });
        }
        Ok(Self {
            positive_text: spec.positive,
            negative_text: spec.negative,
            positive_embedding,
            negative_embedding,
        })
    }
}

/// Embeds every prompt once; the returned pairs are reused for all videos.
pub fn embed_prompts(
    provider: &dyn EmbeddingProvider,
    specs: &[PromptSpec],
) -> Result<Vec<PromptPair>> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("no prompt pairs configured"));
    }
    specs
        .iter()
        .map(|s| {
            let pos = provider.embed_text(&s.positive)?;
            let neg = provider.embed_text(&s.negative)?;
            for e in [&pos, &neg] {
                if e.dimension() != provider.dimension() {
                    return Err(Error::DimensionMismatch {
                        expected: provider.dimension(),
                        actual: e.dimension(),
                    });
                }
            }
            PromptPair::new(s.positive.clone(), s.negative.clone(), pos, neg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prompts.tsv");
        fs::write(
            &path,
            "# pairs\nhigh quality\tlow quality\n\na good photo\ta bad photo\n",
        )
        .unwrap();
        assert_eq!(
            PromptSpec::parse_file(&path).unwrap(),
            PromptSpec::defaults()
        );

        fs::write(&path, "only one column\n").unwrap();
        assert!(matches!(
            PromptSpec::parse_file(&path),
            Err(Error::Parse { line: 1, .. })
        ));
        fs::write(&path, "a\t\n").unwrap();
        assert!(PromptSpec::parse_file(&path).is_err());
        fs::write(&path, "# nothing\n").unwrap();
        assert!(PromptSpec::parse_file(&path).is_err());
    }

    #[test]
    fn shipped_default_file_matches_defaults() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/prompts.tsv");
        assert_eq!(
            PromptSpec::parse_file(path).unwrap(),
            PromptSpec::defaults()
        );
    }
}
