mod common;

use std::fs;
use std::path::Path;

use ouvqa_cli::{run, Y4mDecoder};
use ouvqa_core::aggregate::VideoScore;
use ouvqa_core::bench::BenchmarkReport;
use ouvqa_core::ingest::VideoDecoder;
use ouvqa_core::spatial::NiqeModel;

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("ouvqa")
        .chain(list.iter().copied())
        .map(String::from)
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn y4m_limited_range_420() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.y4m");
    let (w, h) = (5, 3);
    let file = fs::File::create(&path).unwrap();
    let mut enc = y4m::encode(w, h, y4m::Ratio::new(30000, 1001))
        .with_colorspace(y4m::Colorspace::C420jpeg)
        .write_header(file)
        .unwrap();
    let chroma = w.div_ceil(2) * h.div_ceil(2);
    // frame 0: black, white, neutral grey; frame 1: saturated red
    let mut luma = vec![126u8; w * h];
    luma[0] = 16;
    luma[1] = 235;
    enc.write_frame(&y4m::Frame::new(
        [&luma, &vec![128; chroma], &vec![128; chroma]],
        None,
    ))
    .unwrap();
    enc.write_frame(&y4m::Frame::new(
        [&vec![81; w * h], &vec![90; chroma], &vec![240; chroma]],
        None,
    ))
    .unwrap();
    drop(enc);

    let mut src = Y4mDecoder.open(&path).unwrap();
    assert!((src.fps() - 29.97).abs() < 1e-2);
    assert_eq!(src.frame_count_hint(), Some(2));
    let f0 = src.next_frame().unwrap().unwrap();
    assert_eq!((f0.width(), f0.height(), f0.channels()), (w, h, 3));
    assert_eq!(&f0.data()[..6], &[0.0, 0.0, 0.0, 255.0, 255.0, 255.0]);
    let grey = (126.0 - 16.0) * 255.0 / 219.0;
    assert!(f0.data()[6..].iter().all(|&v| (v - grey).abs() < 1e-3));
    let f1 = src.next_frame().unwrap().unwrap();
    let (r, g, b) = (f1.data()[0], f1.data()[1], f1.data()[2]);
    assert!(
        r > 250.0 && g < 5.0 && b < 5.0,
        "BT.601 red decoded as ({r}, {g}, {b})"
    );
    assert!(src.next_frame().unwrap().is_none());
}

#[test]
fn y4m_full_range_mono_and_high_bit_depth() {
    let dir = tempfile::tempdir().unwrap();
    let mono = dir.path().join("m.y4m");
    common::write_y4m_mono(&mono, 4, 2, 25, &[vec![0, 10, 128, 255, 1, 2, 3, 4]]);
    let mut src = Y4mDecoder.open(&mono).unwrap();
    let f = src.next_frame().unwrap().unwrap();
    let firsts: Vec<f32> = f.data().chunks(3).map(|c| c[0]).collect();
    assert_eq!(firsts, vec![0.0, 10.0, 128.0, 255.0, 1.0, 2.0, 3.0, 4.0]);
    assert!(f.data().chunks(3).all(|c| c[0] == c[1] && c[1] == c[2]));

    let deep = dir.path().join("d.y4m");
    let file = fs::File::create(&deep).unwrap();
    let ext = y4m::VendorExtensionString::new(b"COLORRANGE=FULL".to_vec()).unwrap();
    let mut enc = y4m::encode(2, 2, y4m::Ratio::new(24, 1))
        .with_colorspace(y4m::Colorspace::C444p10)
        .append_vendor_extension(ext)
        .write_header(file)
        .unwrap();
    let y: Vec<u8> = [0u16, 1023, 512, 256]
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect();
    let c: Vec<u8> = [512u16; 4].iter().flat_map(|v| v.to_le_bytes()).collect();
    enc.write_frame(&y4m::Frame::new([&y, &c, &c], None))
        .unwrap();
    drop(enc);
    let f = Y4mDecoder
        .open(&deep)
        .unwrap()
        .next_frame()
        .unwrap()
        .unwrap();
    let firsts: Vec<f32> = f.data().chunks(3).map(|c| c[0]).collect();
    assert_eq!(firsts[0], 0.0);
    assert_eq!(firsts[1], 255.0);
    assert_eq!(firsts[2], 128.0);
    assert_eq!(firsts[3], 64.0);
}

#[test]
fn y4m_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.y4m");
    fs::write(&bad, b"not a y4m file\n").unwrap();
    assert!(Y4mDecoder.open(&bad).is_err());
    assert!(Y4mDecoder.open(&dir.path().join("missing.y4m")).is_err());
}

#[test]
fn bench_writes_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::write_corpus(
        dir.path(),
        &["brick", "chelsea"],
        &common::SEVERITIES[..2],
        12,
        9,
    );
    let out = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let svg = dir.path().join("plots");
    let emb = format!("fixtures:{}", p(&corpus.embeddings));
    let code = run(args(&[
        "bench",
        "--embeddings",
        &emb,
        "--manifest",
        p(&corpus.manifest),
        "--out",
        p(&out),
        "--csv",
        p(&csv),
        "--svg",
        p(&svg),
        "--workers",
        "2",
        "--plcc-fit",
        "logistic4",
    ]));
    assert_eq!(code, 0);
    let report = BenchmarkReport::load_json(&out).unwrap();
    report.validate().unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.ablation.len(), 7);
    assert_eq!(report.config.workers, 2);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 5);
    assert!(svg.join("q_unified.svg").exists());
}

#[test]
fn bench_missing_manifest_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let emb = format!("fixtures:{}", p(&dir.path().join("e.txt")));
    let code = run(args(&[
        "bench",
        "--embeddings",
        &emb,
        "--manifest",
        "/nonexistent/m.csv",
        "--out",
        p(&out),
    ]));
    assert_eq!(code, 1);
    assert!(!out.exists());
}

#[test]
fn fixed_stats_reproduce_two_pass_scores() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::write_corpus(dir.path(), &["camera"], &common::SEVERITIES, 10, 3);
    let emb = format!("fixtures:{}", p(&corpus.embeddings));
    let videos: Vec<&str> = corpus.videos.iter().map(|v| p(v)).collect();
    let stats = dir.path().join("corpus.stats");
    let two_pass = dir.path().join("two.json");
    let fixed = dir.path().join("fixed.json");

    let mut a = args(&["export-stats", "--embeddings", &emb, "--out", p(&stats)]);
    a.extend(videos.iter().map(|v| v.to_string()));
    assert_eq!(run(a), 0);
    let mut a = args(&[
        "score",
        "--embeddings",
        &emb,
        "--two-pass",
        "--out",
        p(&two_pass),
    ]);
    a.extend(videos.iter().map(|v| v.to_string()));
    assert_eq!(run(a), 0);
    let mut a = args(&[
        "score",
        "--embeddings",
        &emb,
        "--stats",
        p(&stats),
        "--out",
        p(&fixed),
    ]);
    a.extend(videos.iter().map(|v| v.to_string()));
    assert_eq!(run(a), 0);

    let load = |path: &Path| -> Vec<VideoScore> {
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
    };
    let (x, y) = (load(&two_pass), load(&fixed));
    assert_eq!(x.len(), 3);
    for (a, b) in x.iter().zip(&y) {
        assert_eq!(a.video_id, b.video_id);
        // the stats file stores values at full round-trip precision
        assert!(
            (a.q_unified - b.q_unified).abs() < 1e-12,
            "{} vs {}",
            a.q_unified,
            b.q_unified
        );
    }

    // a single video cannot define its own statistics
    assert_eq!(
        run(args(&[
            "score",
            "--embeddings",
            &emb,
            "--two-pass",
            videos[0]
        ])),
        1
    );
}

#[test]
fn curvature_dump_lists_both_domains() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::write_corpus(dir.path(), &["brick"], &common::SEVERITIES[..1], 6, 1);
    let out = dir.path().join("curv.txt");
    assert_eq!(
        run(args(&[
            "curvature-dump",
            p(&corpus.videos[0]),
            "--out",
            p(&out)
        ])),
        0
    );
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for (line, tag) in lines.iter().zip(["lgn", "v1"]) {
        let mut tokens = line.split_whitespace();
        assert_eq!(tokens.next(), Some(tag));
        let values: Vec<f64> = tokens.map(|t| t.parse().unwrap()).collect();
        assert_eq!(values.len(), 4);
        assert!(values
            .iter()
            .all(|v| (0.0..=std::f64::consts::PI).contains(v)));
    }
}

#[test]
fn fit_niqe_round_trip_and_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.mvg");
    let pristine = common::pristine_path("camera");
    let pristine_dir = pristine.parent().unwrap();
    assert_eq!(
        run(args(&[
            "fit-niqe",
            "--out",
            p(&out),
            "--min-images",
            "20",
            p(pristine_dir)
        ])),
        1
    );
    assert_eq!(
        run(args(&[
            "fit-niqe",
            "--out",
            p(&out),
            "--min-images",
            "2",
            p(&pristine),
            p(&common::pristine_path("brick"))
        ])),
        0
    );
    assert_eq!(NiqeModel::load(&out).unwrap().dimension(), 36);
}
