//! Scale alignment and fusion of the three indexes.
//!
//! Raw spatial and temporal scores are z-scored against statistics of the
//! scored set (or of a previously exported stats file) and squashed by a
//! logistic with "lower raw is better" orientation. The semantic branch is
//! already a sum of logistic values and is not renormalised under the
//! default strategy.

mod score;
mod stats;

pub use score::{
    corpus_stats, finalize_scores, score_corpus, NiqePooling, RawVideoScore, Scorer, StatsMode,
    VideoScore, FLAG_AESTHETIC_REPEATED, FLAG_STATIC_VIDEO,
};
pub use stats::{compute_corpus_stats, CorpusStats, StatsFile, TAG_NIQE, TAG_SEMANTIC, TAG_TPQI};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `1 / (1 + e^{-x})`, evaluated without overflow for any finite `x`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Whether larger raw values mean better quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    HigherBetter,
    LowerBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rescale {
    /// Raw value, negated for lower-better metrics.
    DirectRaw,
    /// Signed z-score.
    LinearNormalize,
    /// Logistic of the signed z-score.
    GaussianSigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Addition,
    Multiplication,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregationStrategy {
    pub rescale: Rescale,
    pub combine: Combine,
}

impl Default for AggregationStrategy {
    fn default() -> Self {
        Self {
            rescale: Rescale::GaussianSigmoid,
            combine: Combine::Addition,
        }
    }
}

impl AggregationStrategy {
    pub const ALL: [AggregationStrategy; 4] = [
        Self {
            rescale: Rescale::GaussianSigmoid,
            combine: Combine::Addition,
        },
        Self {
            rescale: Rescale::GaussianSigmoid,
            combine: Combine::Multiplication,
        },
        Self {
            rescale: Rescale::LinearNormalize,
            combine: Combine::Addition,
        },
        Self {
            rescale: Rescale::DirectRaw,
            combine: Combine::Addition,
        },
    ];

    pub fn name(&self) -> &'static str {
        match (self.rescale, self.combine) {
            (Rescale::GaussianSigmoid, Combine::Addition) => "sigmoid-add",
            (Rescale::GaussianSigmoid, Combine::Multiplication) => "sigmoid-mul",
            (Rescale::LinearNormalize, Combine::Addition) => "linear-add",
            (Rescale::LinearNormalize, Combine::Multiplication) => "linear-mul",
            (Rescale::DirectRaw, Combine::Addition) => "direct-add",
            (Rescale::DirectRaw, Combine::Multiplication) => "direct-mul",
        }
    }
}

impl fmt::Display for AggregationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = s
            .split_once('-')
            .ok_or_else(|| Error::invalid(format!("unknown aggregation strategy `{s}`")))?;
        let rescale = match r {
            "sigmoid" => Rescale::GaussianSigmoid,
            "linear" => Rescale::LinearNormalize,
            "direct" => Rescale::DirectRaw,
            _ => return Err(Error::invalid(format!("unknown rescale `{r}` in `{s}`"))),
        };
        let combine = match c {
            "add" => Combine::Addition,
            "mul" => Combine::Multiplication,
            _ => {
                return Err(Error::invalid(format!(
                    "unknown combination `{c}` in `{s}`"
                )))
            }
        };
        Ok(Self { rescale, combine })
    }
}

/// Maps a raw metric value onto the common scale.
pub fn rescale(
    x: f64,
    stats: &CorpusStats,
    orientation: Orientation,
    rescale: Rescale,
) -> Result<f64> {
    let sign = match orientation {
        Orientation::HigherBetter => 1.0,
        Orientation::LowerBetter => -1.0,
    };
    if rescale == Rescale::DirectRaw {
        return Ok(sign * x);
    }
    stats.check()?;
    let z = sign * (x - stats.mean()) / stats.std();
    Ok(match rescale {
        Rescale::LinearNormalize => z,
        _ => logistic(z),
    })
}

pub fn unified_index(q_a: f64, q_s: f64, q_t: f64, combine: Combine) -> f64 {
    match combine {
        Combine::Addition => q_a + q_s + q_t,
        Combine::Multiplication => q_a * q_s * q_t,
    }
}
