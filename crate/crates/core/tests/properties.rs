//! Property tests over the public API.

use std::path::Path;

use ouvqa_core::aggregate::{
    compute_corpus_stats, logistic, rescale, unified_index, Combine, CorpusStats, Orientation,
    Rescale, StatsFile,
};
use ouvqa_core::bench::{fractional_ranks, srcc};
use ouvqa_core::semantic::{affinity, semantic_index_from_da, EmbeddingVector};
use ouvqa_core::temporal::{trajectory_curvature, PerceptualTrajectory};
use proptest::prelude::*;

fn stats() -> impl Strategy<Value = CorpusStats> {
    (-50.0..50.0f64, 0.01..20.0f64).prop_map(|(m, s)| CorpusStats::new("x", m, s, 10).unwrap())
}

fn nonzero_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, d)
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

fn distinct(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, n)
}

proptest! {
    #[test]
    fn sigmoid_rescale_stays_in_unit_interval(x in -1e6..1e6f64, s in stats()) {
        for o in [Orientation::HigherBetter, Orientation::LowerBetter] {
            let v = rescale(x, &s, o, Rescale::GaussianSigmoid).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn rescale_preserves_rank(a in -1e3..1e3f64, b in -1e3..1e3f64, s in stats()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for r in [Rescale::DirectRaw, Rescale::LinearNormalize, Rescale::GaussianSigmoid] {
            let up = |x| rescale(x, &s, Orientation::HigherBetter, r).unwrap();
            let down = |x| rescale(x, &s, Orientation::LowerBetter, r).unwrap();
            prop_assert!(up(lo) <= up(hi));
            prop_assert!(down(lo) >= down(hi));
        }
    }

    #[test]
    fn semantic_index_is_bounded_by_pair_count(da in prop::collection::vec(-2.0..2.0f64, 1..6)) {
        let q = semantic_index_from_da(&da, 1.0).unwrap();
        prop_assert!(q > 0.0 && q < da.len() as f64);
        let expected: f64 = da.iter().map(|&d| logistic(d)).sum();
        prop_assert!((q - expected).abs() < 1e-12);
    }

    #[test]
    fn unified_index_of_default_components(qa in 0.0..2.0f64, qs in 0.0..1.0f64, qt in 0.0..1.0f64) {
        let sum = unified_index(qa, qs, qt, Combine::Addition);
        prop_assert!((0.0..=4.0).contains(&sum));
        let prod = unified_index(qa, qs, qt, Combine::Multiplication);
        prop_assert!((0.0..=2.0).contains(&prod));
    }

    #[test]
    fn affinity_ignores_vector_scale(
        (frames, text) in (2usize..16).prop_flat_map(|d| (prop::collection::vec(nonzero_vec(d), 1..6), nonzero_vec(d))),
        scales in prop::collection::vec(1e-3..1e3f64, 7),
    ) {
        let f: Vec<EmbeddingVector> = frames.iter().map(|v| EmbeddingVector::new(v.clone()).unwrap()).collect();
        let t = EmbeddingVector::new(text).unwrap();
        let a = affinity(&f, &t).unwrap();
        prop_assert!((-1.0..=1.0).contains(&a));
        let fs: Vec<EmbeddingVector> = f.iter().zip(&scales).map(|(v, &s)| v.scaled(s).unwrap()).collect();
        let b = affinity(&fs, &t.scaled(scales[6]).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn srcc_is_symmetric_and_rank_invariant(x in distinct(3..40), seed in any::<u64>()) {
        // a pseudo-random partner series with occasional ties
        let y: Vec<f64> = x.iter().enumerate()
            .map(|(i, v)| ((v * 7.3 + (seed % 97) as f64 + i as f64 * 1.7).sin() * 10.0).round())
            .collect();
        prop_assume!(y.iter().any(|v| *v != y[0]) && x.iter().any(|v| *v != x[0]));
        let r = srcc(&x, &y).unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert!((r - srcc(&y, &x).unwrap()).abs() < 1e-12);
        let cubed: Vec<f64> = x.iter().map(|v| v * v * v + 3.0 * v).collect();
        prop_assert!((r - srcc(&cubed, &y).unwrap()).abs() < 1e-12);
        let flipped: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((r + srcc(&flipped, &y).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fractional_ranks_sum(x in distinct(1..50)) {
        let n = x.len() as f64;
        let total: f64 = fractional_ranks(&x).iter().sum();
        prop_assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn curvature_invariant_to_rotation_translation_scale(
        pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3..30),
        theta in 0.0..std::f64::consts::TAU,
        shift in (-100.0..100.0f64, -100.0..100.0f64),
        scale in 0.01..100.0f64,
    ) {
        let base: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
        let (c, s) = (theta.cos(), theta.sin());
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|&(x, y)| vec![scale * (c * x - s * y) + shift.0, scale * (s * x + c * y) + shift.1])
            .collect();
        let a = trajectory_curvature(&PerceptualTrajectory::new(base).unwrap()).unwrap();
        let b = trajectory_curvature(&PerceptualTrajectory::new(moved).unwrap()).unwrap();
        // scaling can move a displacement across the degeneracy threshold
        prop_assume!(a.degenerate == 0 && b.degenerate == 0);
        prop_assert_eq!(a.values.len(), b.values.len());
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!((0.0..=std::f64::consts::PI).contains(u));
            prop_assert!((u - v).abs() < 1e-9, "{} vs {}", u, v);
        }
    }

    #[test]
    fn stats_file_round_trips(values in prop::collection::vec(-1e4..1e4f64, 2..40), t in prop::collection::vec(-10.0..10.0f64, 2..10)) {
        prop_assume!(values.iter().any(|v| *v != values[0]) && t.iter().any(|v| *v != t[0]));
        let file = StatsFile {
            niqe: compute_corpus_stats("niqe", &values).unwrap(),
            tpqi: compute_corpus_stats("tpqi", &t).unwrap(),
            semantic: None,
        };
        let back = StatsFile::parse_str(&file.to_text(), Path::new("mem")).unwrap();
        prop_assert_eq!(back, file);
    }
}
