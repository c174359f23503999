//! Embedding provider backed by an exported ONNX visual encoder.
//!
//! A bundle is a directory holding:
//!
//! * `bundle.json`: the manifest ([`BundleManifest`]),
//! * the visual encoder as ONNX, taking a `1 x 3 x S x S` float tensor of
//!   normalised RGB and returning a `1 x D` embedding,
//! * a text-embedding table in the fixture record format
//!   (`text D v1 ... vD` per line), precomputed for the prompt set.
//!
//! Text towers need a tokenizer; precomputing them at export time keeps
//! the runtime free of one. Scoring with prompts absent from the table is an
//! error naming the missing text.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ouvqa_core::ingest::resize_bicubic;
use ouvqa_core::semantic::{EmbeddingProvider, EmbeddingVector, FixtureEmbeddings, FrameKey};
use ouvqa_core::FrameImage;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tract_onnx::prelude::*;

pub const BUNDLE_FORMAT: &str = "ouvqa-embedding-bundle";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid bundle manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("checksum mismatch for {file}: expected {expected}, found {actual}")]
    Checksum {
        file: String,
        expected: String,
        actual: String,
    },
    #[error("cannot load ONNX model {path}: {message}")]
    Model { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] ouvqa_core::Error),
}

/// Contents of `bundle.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format: String,
    pub version: u32,
    /// Embedding dimension shared by both towers.
    pub dimension: usize,
    /// Side of the square input the visual encoder expects.
    pub input_size: usize,
    /// Per-channel RGB normalisation applied to `[0, 1]` pixel values.
    pub mean: [f32; 3],
    pub std: [f32; 3],
    pub visual_model: String,
    pub text_embeddings: String,
    /// Optional hex SHA-256 digests of bundle files, verified on load.
    #[serde(default)]
    pub sha256: BTreeMap<String, String>,
}

impl BundleManifest {
    fn validate(&self, path: &Path) -> Result<(), BundleError> {
        let bad = |m: String| {
            Err(BundleError::Manifest {
                path: path.to_path_buf(),
                message: m,
            })
        };
        if self.format != BUNDLE_FORMAT {
            return bad(format!(
                "format is `{}`, expected `{BUNDLE_FORMAT}`",
                self.format
            ));
        }
        if self.version != BUNDLE_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.dimension == 0 || self.input_size == 0 {
            return bad("dimension and input_size must be positive".into());
        }
        if self.std.iter().any(|s| !(s.is_finite() && *s > 0.0))
            || self.mean.iter().any(|m| !m.is_finite())
        {
            return bad("mean must be finite and std positive".into());
        }
        for name in [&self.visual_model, &self.text_embeddings] {
            if Path::new(name).components().count() != 1 {
                return bad(format!("`{name}` must be a file name inside the bundle"));
            }
        }
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read(path: &Path) -> Result<Vec<u8>, BundleError> {
    fs::read(path).map_err(|source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the bundle's visual encoder; text embeddings come from its table.
pub struct OnnxProvider {
    manifest: BundleManifest,
    plan: Arc<TypedRunnableModel>,
    texts: FixtureEmbeddings,
}

impl std::fmt::Debug for OnnxProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxProvider")
            .field("manifest", &self.manifest)
            .finish_non_exhaustive()
    }
}

impl OnnxProvider {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, BundleError> {
        let dir = dir.as_ref();
        let manifest_path = dir.join("bundle.json");
        let manifest: BundleManifest =
            serde_json::from_slice(&read(&manifest_path)?).map_err(|e| BundleError::Manifest {
                path: manifest_path.clone(),
                message: e.to_string(),
            })?;
        manifest.validate(&manifest_path)?;
        for (file, expected) in &manifest.sha256 {
            let actual = sha256_hex(&read(&dir.join(file))?);
            if !actual.eq_ignore_ascii_case(expected) {
                return Err(BundleError::Checksum {
                    file: file.clone(),
                    expected: expected.clone(),
                    actual,
                });
            }
        }

        let model_path = dir.join(&manifest.visual_model);
        let model_err = |e: TractError| BundleError::Model {
            path: model_path.clone(),
            message: format!("{e:#}"),
        };
        let s = manifest.input_size;
        let plan = tract_onnx::onnx()
            .model_for_read(&mut read(&model_path)?.as_slice())
            .and_then(|m| {
                m.with_input_fact(
                    0,
                    InferenceFact::dt_shape(f32::datum_type(), tvec!(1, 3, s, s)),
                )
            })
            .and_then(|m| m.into_optimized())
            .and_then(|m| m.into_runnable())
            .map_err(model_err)?;

        let texts = FixtureEmbeddings::load(dir.join(&manifest.text_embeddings))?;
        if let Some(d) = texts.dimension() {
            if d != manifest.dimension {
                return Err(BundleError::Manifest {
                    path: manifest_path,
                    message: format!(
                        "text embeddings have dimension {d}, manifest says {}",
                        manifest.dimension
                    ),
                });
            }
        }
        Ok(Self {
            manifest,
            plan,
            texts,
        })
    }

    pub fn manifest(&self) -> &BundleManifest {
        &self.manifest
    }

    fn input_tensor(&self, frame: &FrameImage) -> ouvqa_core::Result<Tensor> {
        let s = self.manifest.input_size;
        let resized;
        let frame = if frame.width() == s && frame.height() == s {
            frame
        } else {
            resized = resize_bicubic(frame, s, s)?;
            &resized
        };
        let plane = s * s;
        let mut data = vec![0f32; 3 * plane];
        for px in 0..plane {
            for c in 0..3 {
                // Luma frames are broadcast to all three channels.
                let v = if frame.is_luma() {
                    frame.data()[px]
                } else {
                    frame.data()[px * 3 + c]
                };
                data[c * plane + px] = (v / 255.0 - self.manifest.mean[c]) / self.manifest.std[c];
            }
        }
        Tensor::from_shape(&[1, 3, s, s], &data)
            .map_err(|e| ouvqa_core::Error::InvalidModel(format!("cannot build input tensor: {e}")))
    }
}

impl EmbeddingProvider for OnnxProvider {
    fn dimension(&self) -> usize {
        self.manifest.dimension
    }

    fn embed_image(
        &self,
        frame: &FrameImage,
        _key: &FrameKey,
    ) -> ouvqa_core::Result<EmbeddingVector> {
        let input = self.input_tensor(frame)?;
        let outputs = self.plan.run(tvec!(input.into())).map_err(|e| {
            ouvqa_core::Error::InvalidModel(format!("visual encoder failed: {e:#}"))
        })?;
        let values: Vec<f64> = outputs[0]
            .to_plain_array_view::<f32>()
            .map_err(|e| {
                ouvqa_core::Error::InvalidModel(format!("visual encoder output is not f32: {e}"))
            })?
            .iter()
            .map(|&v| f64::from(v))
            .collect();
        if values.len() != self.manifest.dimension {
            return Err(ouvqa_core::Error::DimensionMismatch {
                expected: self.manifest.dimension,
                actual: values.len(),
            });
        }
        EmbeddingVector::new(values)
    }

    fn embed_text(&self, text: &str) -> ouvqa_core::Result<EmbeddingVector> {
        self.texts.get(text).cloned().ok_or_else(|| {
            ouvqa_core::Error::MissingEmbedding(format!(
                "prompt `{text}` is not in the bundle's text-embedding table; re-export the bundle with this prompt"
            ))
        })
    }
}
