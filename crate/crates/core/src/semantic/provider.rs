use crate::semantic::EmbeddingVector;
use crate::{FrameImage, Result};

/// Identifies an aesthetic-view frame: the video it belongs to and its
/// position within the aesthetic view.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrameKey {
    pub video_id: String,
    pub index: usize,
}

impl FrameKey {
    pub fn new(video_id: impl Into<String>, index: usize) -> Self {
        Self {
            video_id: video_id.into(),
            index,
        }
    }

    /// Record id used by fixture embedding files: `video#index`.
    pub fn record_id(&self) -> String {
        format!("{}#{}", self.video_id, self.index)
    }
}

/// Visual and textual encoders sharing one embedding space.
///
/// Implementations must be deterministic and keep a fixed output dimension.
/// A provider that cannot be called concurrently reports
/// `is_reentrant() == false` and the scoring pipeline serialises its calls.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;

    /// Embeds a 224x224 RGB aesthetic frame. Runtime-backed providers ignore
    /// `key`; fixture providers look embeddings up by it.
    fn embed_image(&self, frame: &FrameImage, key: &FrameKey) -> Result<EmbeddingVector>;

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector>;

    fn is_reentrant(&self) -> bool {
        true
    }
}
