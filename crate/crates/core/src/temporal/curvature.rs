use crate::error::{Error, Result};

/// Difference vectors shorter than this have no defined direction.
pub const CURVATURE_EPSILON: f64 = 1e-8;

/// Ordered response vectors of one video in one perceptual domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptualTrajectory {
    points: Vec<Vec<f64>>,
}

impl PerceptualTrajectory {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = points.first() {
            let d = first.len();
            if let Some(bad) = points.iter().find(|p| p.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: bad.len(),
                });
            }
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("trajectory contains non-finite values"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

/// Turning angles (radians, in `[0, pi]`) between consecutive displacement
/// vectors, excluding triplets with a near-zero displacement.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurvatureSeries {
    pub values: Vec<f64>,
    /// Number of triplets skipped because a displacement was below
    /// [`CURVATURE_EPSILON`].
    pub degenerate: usize,
}

impl CurvatureSeries {
    /// Mean of the defined angles, or `None` when every triplet was
    /// degenerate.
    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }

    pub fn triplets(&self) -> usize {
        self.values.len() + self.degenerate
    }
}

/// Angle between two vectors, `arccos(a.b / |a||b|)`, evaluated as
/// `2 atan2(| a|b| - b|a| |, | a|b| + b|a| |)`. The arccos form loses about
/// half the significant digits near 0 and pi (a collinear pair comes out
/// near 2e-8); this form stays accurate across the whole range.
fn angle(a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x * nb, y * na);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Streaming curvature: feed points in order, only the previous point and
/// displacement are retained.
#[derive(Debug, Clone, Default)]
pub struct CurvatureAccumulator {
    previous: Option<Vec<f64>>,
    displacement: Option<(Vec<f64>, f64)>,
    points: usize,
    series: CurvatureSeries,
}

impl CurvatureAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, point: Vec<f64>) -> Result<()> {
        if let Some(prev) = &self.previous {
            if prev.len() != point.len() {
                return Err(Error::DimensionMismatch {
                    expected: prev.len(),
                    actual: point.len(),
                });
            }
            let diff: Vec<f64> = point.iter().zip(prev).map(|(a, b)| a - b).collect();
            let n = norm(&diff);
            if let Some((last, last_norm)) = &self.displacement {
                if *last_norm < CURVATURE_EPSILON || n < CURVATURE_EPSILON {
                    self.series.degenerate += 1;
                } else {
                    self.series.values.push(angle(last, *last_norm, &diff, n));
                }
            }
            self.displacement = Some((diff, n));
        }
        self.previous = Some(point);
        self.points += 1;
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn finish(self) -> Result<CurvatureSeries> {
        if self.points < 3 {
            return Err(Error::invalid(format!(
                "curvature needs at least 3 points, got {}",
                self.points
            )));
        }
        Ok(self.series)
    }
}

pub fn trajectory_curvature(trajectory: &PerceptualTrajectory) -> Result<CurvatureSeries> {
    let mut acc = CurvatureAccumulator::new();
    for p in trajectory.points() {
        acc.push(p.clone())?;
    }
    acc.finish()
}
