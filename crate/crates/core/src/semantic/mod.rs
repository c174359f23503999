//! Semantic affinity index: how much closer a video's frame embeddings sit
//! to positive quality prompts than to their negative counterparts.

mod fixture;
mod prompts;
mod provider;

pub use fixture::{FixtureEmbeddings, FixtureProvider};
pub use prompts::{embed_prompts, PromptPair, PromptSpec};
pub use provider::{EmbeddingProvider, FrameKey};

use crate::aggregate::logistic;
use crate::{Error, Result};

/// A feature vector from a visual or textual encoder. Not normalised in
/// storage; cosine similarity normalises on use.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("embedding has no components"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding has non-finite components"));
        }
        Ok(Self(values))
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * factor).collect())
    }
}

/// Cosine similarity, clamped into `[-1, 1]`.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            actual: b.dimension(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if !(na > 0.0 && nb > 0.0 && na.is_finite() && nb.is_finite()) {
        return Err(Error::DegenerateEmbedding);
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean cosine similarity between every frame embedding and the text embedding.
pub fn affinity(
    frame_embeddings: &[EmbeddingVector],
    text_embedding: &EmbeddingVector,
) -> Result<f64> {
    if frame_embeddings.is_empty() {
        return Err(Error::EmptyInput(
            "affinity needs at least one frame embedding",
        ));
    }
    let mut cosines = frame_embeddings
        .iter()
        .map(|f| cosine(f, text_embedding))
        .collect::<Result<Vec<_>>>()?;
    // summing in sorted order makes the mean independent of frame order
    cosines.sort_by(f64::total_cmp);
    Ok(cosines.iter().sum::<f64>() / cosines.len() as f64)
}

/// `A(V, T+) - A(V, T-)`.
pub fn differential_affinity(
    frame_embeddings: &[EmbeddingVector],
    pair: &PromptPair,
) -> Result<f64> {
    Ok(affinity(frame_embeddings, &pair.positive_embedding)?
        - affinity(frame_embeddings, &pair.negative_embedding)?)
}

/// Differential affinities for every prompt pair, in pair order.
pub fn differential_affinities(
    frame_embeddings: &[EmbeddingVector],
    pairs: &[PromptPair],
) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|p| differential_affinity(frame_embeddings, p))
        .collect()
}

/// `Q_A = sum_p sigmoid(scale * DA_p)`. The raw differential affinity goes
/// straight into the logistic; `scale` is an optional logit multiplier
/// (1 reproduces the plain formulation).
pub fn semantic_index_from_da(da_values: &[f64], scale: f64) -> Result<f64> {
    if da_values.is_empty() {
        return Err(Error::EmptyInput(
            "semantic index needs at least one prompt pair",
        ));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid(format!(
            "semantic scale must be positive, got {scale}"
        )));
    }
    Ok(da_values.iter().map(|&da| logistic(scale * da)).sum())
}

pub fn semantic_index(frame_embeddings: &[EmbeddingVector], pairs: &[PromptPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput(
            "semantic index needs at least one prompt pair",
        ));
    }
    semantic_index_from_da(&differential_affinities(frame_embeddings, pairs)?, 1.0)
}
