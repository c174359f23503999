//! Synthetic video corpora with known quality ordering: slow pans over the
//! bundled grayscale photographs, degraded per severity by sensor noise and
//! camera shake, plus fixture embeddings whose semantic shift follows the
//! same ordering.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ouvqa_core::FrameImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const WIDTH: usize = 384;
pub const HEIGHT: usize = 216;
pub const FPS: usize = 24;
pub const EMBEDDING_DIM: usize = 8;
pub const PROMPTS: [(&str, &str); 2] = [
    ("high quality", "low quality"),
    ("a good photo", "a bad photo"),
];

pub fn pristine_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/assets/pristine")
        .join(format!("{name}.png"))
}

/// A bundled photograph as 8-bit luma, `(width, height, pixels)`.
pub fn pristine_luma(name: &str) -> (usize, usize, Vec<f64>) {
    let img = FrameImage::open(pristine_path(name)).expect("bundled image");
    let luma = img.luma_f64().expect("luma");
    (img.width(), img.height(), luma)
}

pub fn add_noise(data: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).unwrap();
        for v in data.iter_mut() {
            *v += normal.sample(rng);
        }
    }
}

pub fn quantize(data: &[f64]) -> Vec<u8> {
    data.iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Separable Gaussian blur (radius `ceil(3 sigma)`, replicated borders).
pub fn gaussian_blur(data: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return data.to_vec();
    }
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = (-r..=r)
                .map(|i| k[(i + r) as usize] * data[y * w + clamp(x as isize + i, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (-r..=r)
                .map(|i| k[(i + r) as usize] * tmp[clamp(y as isize + i, h) * w + x])
                .sum();
        }
    }
    out
}

/// Writes 8-bit full-range monochrome YUV4MPEG2.
pub fn write_y4m_mono(path: &Path, w: usize, h: usize, fps: usize, frames: &[Vec<u8>]) {
    let file = fs::File::create(path).unwrap();
    let ext = y4m::VendorExtensionString::new(b"COLORRANGE=FULL".to_vec()).unwrap();
    let mut enc = y4m::encode(w, h, y4m::Ratio::new(fps, 1))
        .with_colorspace(y4m::Colorspace::Cmono)
        .append_vendor_extension(ext)
        .write_header(std::io::BufWriter::new(file))
        .unwrap();
    for f in frames {
        enc.write_frame(&y4m::Frame::new([f, &[], &[]], None))
            .unwrap();
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Severity {
    pub noise_sigma: f64,
    /// Peak per-frame camera displacement in pixels.
    pub shake: i64,
    /// Semantic shift toward the positive prompts (negative = toward the
    /// negative prompts).
    pub semantic: f64,
    pub mos: f64,
}

pub const SEVERITIES: [Severity; 3] = [
    Severity {
        noise_sigma: 0.0,
        shake: 0,
        semantic: 0.12,
        mos: 4.5,
    },
    Severity {
        noise_sigma: 8.0,
        shake: 2,
        semantic: 0.0,
        mos: 3.0,
    },
    Severity {
        noise_sigma: 25.0,
        shake: 6,
        semantic: -0.12,
        mos: 1.5,
    },
];

pub const CONTENTS: [&str; 4] = ["brick", "camera", "chelsea", "motorcycle_left"];

/// Frames of a one-pixel-per-frame horizontal pan with optional shake and noise.
pub fn pan_frames(
    content: &str,
    frames: usize,
    severity: &Severity,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<u8>> {
    let (iw, ih, src) = pristine_luma(content);
    let margin = severity.shake.max(6) as usize;
    assert!(
        iw >= WIDTH + frames + 2 * margin && ih >= HEIGHT + 2 * margin,
        "{content} too small"
    );
    (0..frames)
        .map(|t| {
            let (dx, dy) = if severity.shake > 0 {
                (
                    rng.random_range(-severity.shake..=severity.shake),
                    rng.random_range(-severity.shake..=severity.shake),
                )
            } else {
                (0, 0)
            };
            let x0 = (margin as i64 + t as i64 + dx) as usize;
            let y0 = (margin as i64 + dy) as usize;
            let mut crop: Vec<f64> = (0..HEIGHT)
                .flat_map(|y| (0..WIDTH).map(move |x| (x, y)))
                .map(|(x, y)| src[(y0 + y) * iw + x0 + x])
                .collect();
            add_noise(&mut crop, severity.noise_sigma, rng);
            quantize(&crop)
        })
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let v: Vec<f64> = (0..EMBEDDING_DIM).map(|_| normal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn record(out: &mut String, id: &str, v: &[f64]) {
    let _ = write!(out, "{id} {}", v.len());
    for x in v {
        let _ = write!(out, " {x}");
    }
    out.push('\n');
}

pub struct Corpus {
    pub manifest: PathBuf,
    pub embeddings: PathBuf,
    pub videos: Vec<PathBuf>,
}

/// Writes `contents x severities` videos, a manifest with MOS by severity
/// and a fixture embedding file into `dir`.
///
/// Frame embeddings are a per-content vector plus the severity's shift
/// along the mean positive-minus-negative prompt direction, plus a
/// per-content bias of comparable size so the semantic index alone does not
/// recover the ordering, plus per-frame jitter.
pub fn write_corpus(
    dir: &Path,
    contents: &[&str],
    severities: &[Severity],
    frames: usize,
    seed: u64,
) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut emb = String::new();
    let mut prompt_vecs = Vec::new();
    for (pos, neg) in PROMPTS {
        let (p, n) = (random_unit(&mut rng), random_unit(&mut rng));
        record(&mut emb, pos, &p);
        record(&mut emb, neg, &n);
        prompt_vecs.push((p, n));
    }
    let mut direction = [0.0; EMBEDDING_DIM];
    for (p, n) in &prompt_vecs {
        for i in 0..EMBEDDING_DIM {
            direction[i] += (p[i] - n[i]) / prompt_vecs.len() as f64;
        }
    }
    let jitter = Normal::new(0.0, 0.02).unwrap();

    let mut manifest = String::from("video_path,mos\n");
    let mut videos = Vec::new();
    for (ci, content) in contents.iter().enumerate() {
        let base = random_unit(&mut rng);
        let bias =
            0.1 * (ci as f64 - (contents.len() as f64 - 1.0) / 2.0) / contents.len().max(1) as f64;
        for (si, sev) in severities.iter().enumerate() {
            let id = format!("{content}_s{si}");
            let path = dir.join(format!("{id}.y4m"));
            write_y4m_mono(
                &path,
                WIDTH,
                HEIGHT,
                FPS,
                &pan_frames(content, frames, sev, &mut rng),
            );
            for k in 0..32 {
                let v: Vec<f64> = (0..EMBEDDING_DIM)
                    .map(|i| {
                        base[i] + (sev.semantic + bias) * direction[i] + jitter.sample(&mut rng)
                    })
                    .collect();
                record(&mut emb, &format!("{id}#{k}"), &v);
            }
            let _ = writeln!(manifest, "{id}.y4m,{}", sev.mos);
            videos.push(path);
        }
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest).unwrap();
    let embeddings = dir.join("embeddings.txt");
    fs::write(&embeddings, emb).unwrap();
    Corpus {
        manifest: manifest_path,
        embeddings,
        videos,
    }
}
