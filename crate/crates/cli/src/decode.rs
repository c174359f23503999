//! Video decoders: YUV4MPEG2 natively, the plain-text raw fixture format,
//! and anything else through an `ffmpeg` subprocess.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Stdio};

use ouvqa_core::ingest::{RawFixtureDecoder, VideoDecoder, VideoSource};
use ouvqa_core::{Error, FrameImage, Result};

fn decode_error(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::Decode {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// YUV 4:4:4 / 4:2:2 / 4:2:0 / mono Y4M, any bit depth, converted to 8-bit
/// RGB with BT.601 coefficients. Limited (studio) range unless the header
/// carries `XCOLORRANGE=FULL`. Samples deeper than 8 bits are scaled by
/// `2^(8 - N)`.
#[derive(Debug, Default, Clone, Copy)]
pub struct Y4mDecoder;

struct Y4mSource {
    path: PathBuf,
    decoder: y4m::Decoder<BufReader<File>>,
    fps: f64,
    frame_count: Option<usize>,
    full_range: bool,
    chroma_shift: Option<(usize, usize)>,
}

fn chroma_shift(cs: y4m::Colorspace) -> Option<(usize, usize)> {
    use y4m::Colorspace::*;
    match cs {
        Cmono | Cmono12 => None,
        C420 | C420p10 | C420p12 | C420jpeg | C420paldv | C420mpeg2 => Some((1, 1)),
        C422 | C422p10 | C422p12 => Some((1, 0)),
        _ => Some((0, 0)),
    }
}

impl VideoDecoder for Y4mDecoder {
    fn open(&self, path: &Path) -> Result<Box<dyn VideoSource>> {
        let file = File::open(path).map_err(|e| decode_error(path, e))?;
        let file_len = file.metadata().map(|m| m.len() as usize).ok();
        let decoder =
            y4m::decode(BufReader::new(file)).map_err(|e| decode_error(path, format!("{e:?}")))?;
        let rate = decoder.get_framerate();
        if rate.num == 0 || rate.den == 0 {
            return Err(decode_error(path, "frame rate must be positive"));
        }
        let fps = rate.num as f64 / rate.den as f64;
        let raw_params_len = decoder.get_raw_params().len();
        let params = String::from_utf8_lossy(decoder.get_raw_params()).into_owned();
        let full_range = params
            .split_whitespace()
            .any(|p| p.eq_ignore_ascii_case("XCOLORRANGE=FULL"));
        let shift = chroma_shift(decoder.get_colorspace());
        let (w, h) = (decoder.get_width(), decoder.get_height());
        let bps = decoder.get_bytes_per_sample();
        let chroma = match shift {
            None => 0,
            Some((sx, sy)) => 2 * w.div_ceil(1 << sx) * h.div_ceil(1 << sy),
        };
        // Exact when frames carry no per-frame parameters; otherwise no hint.
        let frame_bytes = "FRAME\n".len() + (w * h + chroma) * bps;
        let header = "YUV4MPEG2 ".len() + raw_params_len + 1;
        let frame_count = file_len
            .and_then(|n| n.checked_sub(header))
            .filter(|body| body % frame_bytes == 0)
            .map(|body| body / frame_bytes);
        Ok(Box::new(Y4mSource {
            path: path.to_path_buf(),
            decoder,
            fps,
            frame_count,
            full_range,
            chroma_shift: shift,
        }))
    }
}

impl Y4mSource {
    fn convert(
        &self,
        y: &[u8],
        u: &[u8],
        v: &[u8],
        bytes: usize,
        depth: usize,
    ) -> Result<FrameImage> {
        let (w, h) = (self.decoder.get_width(), self.decoder.get_height());
        // Higher bit depths carry the 8-bit levels shifted left, so neutral
        // chroma (2^(N-1)) lands exactly on 128.
        let step = (1u32 << (depth - 8)) as f32;
        let sample = |plane: &[u8], i: usize| -> f32 {
            let raw = if bytes == 1 {
                plane[i] as u32
            } else {
                u16::from_le_bytes([plane[2 * i], plane[2 * i + 1]]) as u32
            };
            raw as f32 / step
        };
        let mut rgb = Vec::with_capacity(w * h * 3);
        for row in 0..h {
            for col in 0..w {
                let yv = sample(y, row * w + col);
                let (cb, cr) = match self.chroma_shift {
                    None => (128.0, 128.0),
                    Some((sx, sy)) => {
                        let cw = w.div_ceil(1 << sx);
                        let i = (row >> sy) * cw + (col >> sx);
                        (sample(u, i), sample(v, i))
                    }
                };
                let (yn, cbn, crn) = if self.full_range {
                    (yv, cb - 128.0, cr - 128.0)
                } else {
                    (
                        (yv - 16.0) * 255.0 / 219.0,
                        (cb - 128.0) * 255.0 / 224.0,
                        (cr - 128.0) * 255.0 / 224.0,
                    )
                };
                rgb.push(yn + 1.402 * crn);
                rgb.push(yn - 0.344_136 * cbn - 0.714_136 * crn);
                rgb.push(yn + 1.772 * cbn);
            }
        }
        FrameImage::from_clamped(w, h, 3, rgb)
    }
}

impl VideoSource for Y4mSource {
    fn fps(&self) -> f64 {
        self.fps
    }

    fn frame_count_hint(&self) -> Option<usize> {
        self.frame_count
    }

    fn next_frame(&mut self) -> Result<Option<FrameImage>> {
        let bytes = self.decoder.get_bytes_per_sample();
        let depth = self.decoder.get_bit_depth();
        let planes = match self.decoder.read_frame() {
            Ok(f) => (
                f.get_y_plane().to_vec(),
                f.get_u_plane().to_vec(),
                f.get_v_plane().to_vec(),
            ),
            Err(y4m::Error::EOF) => return Ok(None),
            Err(e) => return Err(decode_error(&self.path, format!("{e:?}"))),
        };
        self.convert(&planes.0, &planes.1, &planes.2, bytes, depth)
            .map(Some)
    }
}

/// Decodes through `ffmpeg` / `ffprobe` found on `PATH`, streaming RGB24.
#[derive(Debug, Clone)]
pub struct FfmpegDecoder {
    pub ffmpeg: PathBuf,
    pub ffprobe: PathBuf,
}

impl Default for FfmpegDecoder {
    fn default() -> Self {
        Self {
            ffmpeg: "ffmpeg".into(),
            ffprobe: "ffprobe".into(),
        }
    }
}

#[derive(serde::Deserialize)]
struct Probe {
    streams: Vec<ProbeStream>,
}

#[derive(serde::Deserialize)]
struct ProbeStream {
    width: usize,
    height: usize,
    avg_frame_rate: String,
    #[serde(default)]
    r_frame_rate: Option<String>,
}

fn parse_rate(s: &str) -> Option<f64> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let (n, d): (f64, f64) = (n.parse().ok()?, d.parse().ok()?);
    (n > 0.0 && d > 0.0).then(|| n / d)
}

struct FfmpegSource {
    path: PathBuf,
    child: Child,
    stdout: BufReader<ChildStdout>,
    width: usize,
    height: usize,
    fps: f64,
    buf: Vec<u8>,
}

impl VideoDecoder for FfmpegDecoder {
    fn open(&self, path: &Path) -> Result<Box<dyn VideoSource>> {
        let out = Command::new(&self.ffprobe)
            .args(["-v", "error", "-select_streams", "v:0", "-show_entries"])
            .arg("stream=width,height,avg_frame_rate,r_frame_rate")
            .args(["-of", "json"])
            .arg(path)
            .output()
            .map_err(|e| {
                decode_error(path, format!("cannot run {}: {e}", self.ffprobe.display()))
            })?;
        if !out.status.success() {
            return Err(decode_error(
                path,
                String::from_utf8_lossy(&out.stderr).trim(),
            ));
        }
        let probe: Probe =
            serde_json::from_slice(&out.stdout).map_err(|e| decode_error(path, e))?;
        let s = probe
            .streams
            .first()
            .ok_or_else(|| decode_error(path, "no video stream"))?;
        let fps = parse_rate(&s.avg_frame_rate)
            .or_else(|| s.r_frame_rate.as_deref().and_then(parse_rate))
            .ok_or_else(|| decode_error(path, "unknown frame rate"))?;
        let mut child = Command::new(&self.ffmpeg)
            .args(["-v", "error", "-nostdin", "-i"])
            .arg(path)
            .args(["-map", "0:v:0", "-f", "rawvideo", "-pix_fmt", "rgb24", "-"])
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| {
                decode_error(path, format!("cannot run {}: {e}", self.ffmpeg.display()))
            })?;
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Box::new(FfmpegSource {
            path: path.to_path_buf(),
            child,
            stdout,
            width: s.width,
            height: s.height,
            fps,
            buf: vec![0; s.width * s.height * 3],
        }))
    }
}

impl VideoSource for FfmpegSource {
    fn fps(&self) -> f64 {
        self.fps
    }

    fn frame_count_hint(&self) -> Option<usize> {
        // Container frame counts are estimates for many formats and the
        // view builder needs an exact hint, so this source never gives one.
        None
    }

    fn next_frame(&mut self) -> Result<Option<FrameImage>> {
        let mut filled = 0;
        while filled < self.buf.len() {
            match self.stdout.read(&mut self.buf[filled..]) {
                Ok(0) => break,
                Ok(n) => filled += n,
                Err(e) => return Err(decode_error(&self.path, e)),
            }
        }
        if filled == 0 {
            let status = self.child.wait().map_err(|e| decode_error(&self.path, e))?;
            if !status.success() {
                return Err(decode_error(
                    &self.path,
                    format!("ffmpeg exited with {status}"),
                ));
            }
            return Ok(None);
        }
        if filled < self.buf.len() {
            return Err(decode_error(&self.path, "truncated frame from ffmpeg"));
        }
        let data = self.buf.iter().map(|&b| f32::from(b)).collect();
        FrameImage::new(self.width, self.height, 3, data).map(Some)
    }
}

impl Drop for FfmpegSource {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Chooses a decoder by file extension.
#[derive(Debug, Default, Clone)]
pub struct AutoDecoder {
    pub ffmpeg: FfmpegDecoder,
}

impl VideoDecoder for AutoDecoder {
    fn open(&self, path: &Path) -> Result<Box<dyn VideoSource>> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("y4m") => Y4mDecoder.open(path),
            Some("raw") | Some("txt") => RawFixtureDecoder.open(path),
            _ => self.ffmpeg.open(path),
        }
    }
}
