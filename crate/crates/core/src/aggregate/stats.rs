use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const TAG_NIQE: &str = "niqe";
pub const TAG_TPQI: &str = "tpqi";
pub const TAG_SEMANTIC: &str = "semantic";

/// Mean and population standard deviation of one raw metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    metric_tag: String,
    mean: f64,
    std: f64,
    sample_count: usize,
}

impl CorpusStats {
    pub fn new(
        metric_tag: impl Into<String>,
        mean: f64,
        std: f64,
        sample_count: usize,
    ) -> Result<Self> {
        let s = Self {
            metric_tag: metric_tag.into(),
            mean,
            std,
            sample_count,
        };
        s.check()?;
        Ok(s)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let reason = if !self.mean.is_finite() || !self.std.is_finite() {
            "non-finite statistics"
        } else if self.std <= 0.0 {
            "zero standard deviation"
        } else if self.sample_count < 2 {
            "fewer than two samples"
        } else {
            return Ok(());
        };
        Err(Error::DegenerateStats {
            tag: self.metric_tag.clone(),
            reason: reason.into(),
        })
    }

    pub fn metric_tag(&self) -> &str {
        &self.metric_tag
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }
}

/// Mean and population (divide-by-`n`) standard deviation of `values`.
pub fn compute_corpus_stats(metric_tag: &str, values: &[f64]) -> Result<CorpusStats> {
    let degenerate = |reason: &str| Error::DegenerateStats {
        tag: metric_tag.into(),
        reason: reason.into(),
    };
    if values.len() < 2 {
        return Err(degenerate("fewer than two samples"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(degenerate("non-finite sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if values.iter().all(|&v| v == values[0]) || var <= 0.0 {
        return Err(degenerate("all values are equal"));
    }
    CorpusStats::new(metric_tag, mean, var.sqrt(), values.len())
}

/// Statistics needed to rescale a video without its corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsFile {
    pub niqe: CorpusStats,
    pub tpqi: CorpusStats,
    /// Sum of differential affinities; only used by the linear strategy.
    pub semantic: Option<CorpusStats>,
}

impl StatsFile {
    /// Lines of `metric_tag mean std sample_count`; `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# metric_tag mean std sample_count\n");
        for st in [Some(&self.niqe), Some(&self.tpqi), self.semantic.as_ref()]
            .into_iter()
            .flatten()
        {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                st.metric_tag, st.mean, st.std, st.sample_count
            );
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse_str(&std::fs::read_to_string(path)?, path)
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Self> {
        let (mut niqe, mut tpqi, mut semantic) = (None, None, None);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::parse(path, i + 1, m);
            let t: Vec<&str> = line.split_whitespace().collect();
            let [tag, mean, std, count] = t[..] else {
                return Err(bad("expected `metric_tag mean std sample_count`"));
            };
            let mean: f64 = mean.parse().map_err(|_| bad("bad mean"))?;
            let std: f64 = std.parse().map_err(|_| bad("bad std"))?;
            let count: usize = count.parse().map_err(|_| bad("bad sample count"))?;
            let stats = CorpusStats::new(tag, mean, std, count).map_err(|e| bad(&e.to_string()))?;
            let slot = match tag {
                TAG_NIQE => &mut niqe,
                TAG_TPQI => &mut tpqi,
                TAG_SEMANTIC => &mut semantic,
                _ => return Err(bad(&format!("unknown metric tag `{tag}`"))),
            };
            if slot.replace(stats).is_some() {
                return Err(bad(&format!("duplicate metric tag `{tag}`")));
            }
        }
        let missing = |tag: &str| Error::parse(path, 0, format!("missing `{tag}` statistics"));
        Ok(Self {
            niqe: niqe.ok_or_else(|| missing(TAG_NIQE))?,
            tpqi: tpqi.ok_or_else(|| missing(TAG_TPQI))?,
            semantic,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_and_constant_cases() {
        let s = compute_corpus_stats("x", &[0.0, 2.0]).unwrap();
        assert_eq!((s.mean(), s.std(), s.sample_count()), (1.0, 1.0, 2));
        assert!(matches!(
            compute_corpus_stats("x", &[5.0, 5.0, 5.0]),
            Err(Error::DegenerateStats { .. })
        ));
        assert!(compute_corpus_stats("x", &[1.0]).is_err());
    }

    #[test]
    fn stats_file_roundtrip() {
        let f = StatsFile {
            niqe: CorpusStats::new(TAG_NIQE, 5.123456789012345, 0.75, 40).unwrap(),
            tpqi: CorpusStats::new(TAG_TPQI, -0.3, 0.1, 10).unwrap(),
            semantic: None,
        };
        let back = StatsFile::parse_str(&f.to_text(), Path::new("s")).unwrap();
        assert_eq!(f, back);
        let with_sem = StatsFile {
            semantic: Some(CorpusStats::new(TAG_SEMANTIC, 0.1, 0.2, 10).unwrap()),
            ..f
        };
        assert_eq!(
            StatsFile::parse_str(&with_sem.to_text(), Path::new("s")).unwrap(),
            with_sem
        );
    }

    #[test]
    fn stats_file_errors() {
        let p = Path::new("s");
        assert!(StatsFile::parse_str("niqe 1 1 2\n", p).is_err());
        assert!(StatsFile::parse_str("niqe 1 1 2\ntpqi 1 0 2\n", p).is_err());
        assert!(StatsFile::parse_str("niqe 1 1 2\ntpqi 1 1 2\nniqe 1 1 2\n", p).is_err());
        assert!(StatsFile::parse_str("niqe 1 1 2\ntpqi 1 1 2\nfoo 1 1 2\n", p).is_err());
        assert!(StatsFile::parse_str("niqe 1 1\ntpqi 1 1 2\n", p).is_err());
    }
}
