//! Opinion-unaware (zero-shot) video quality scoring.
//!
//! Three independent indexes are computed per video and fused without any
//! regression on human opinion scores:
//!
//! * [`semantic`]: affinity between frame embeddings of a vision-language
//!   encoder and positive/negative text prompts,
//! * [`spatial`]: NIQE natural-scene-statistics distance, sampled at 1 fps,
//! * [`temporal`]: trajectory curvature of simulated LGN / V1 responses.
//!
//! [`aggregate`] normalises and sums them, and [`bench`] evaluates the fused
//! score against mean-opinion-score manifests (SRCC / PLCC).

pub mod aggregate;
pub mod bench;
mod error;
mod filter;
pub mod frame;
pub mod ingest;
pub mod semantic;
pub mod spatial;
pub mod temporal;

pub use error::{Error, Result};
pub use frame::FrameImage;
