//! Plain-text raw video fixtures: a header line `W H C M FPS` followed by
//! `M*W*H*C` whitespace-separated intensities (frame-major, then row-major,
//! channels interleaved).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DecodedVideo, MemorySource, VideoDecoder, VideoSource};
use crate::{Error, FrameImage, Result};

pub fn read_raw_video(path: impl AsRef<Path>) -> Result<DecodedVideo> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .by_ref()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(path, 1, "missing `W H C M FPS` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(Error::parse(
            path,
            1,
            format!("header needs 5 fields, found {}", fields.len()),
        ));
    }
    let dim = |i: usize, name: &str| -> Result<usize> {
        fields[i]
            .parse::<usize>()
            .map_err(|_| Error::parse(path, 1, format!("bad {name} `{}`", fields[i])))
    };
    let (w, h, c, m) = (
        dim(0, "width")?,
        dim(1, "height")?,
        dim(2, "channels")?,
        dim(3, "frame count")?,
    );
    let fps: f64 = fields[4]
        .parse()
        .map_err(|_| Error::parse(path, 1, format!("bad fps `{}`", fields[4])))?;

    let per_frame = w * h * c;
    let mut values = Vec::with_capacity(per_frame * m);
    for (n, line) in lines.enumerate() {
        for tok in line.split_whitespace() {
            let v: f32 = tok
                .parse()
                .map_err(|_| Error::parse(path, n + 2, format!("bad intensity `{tok}`")))?;
            values.push(v);
        }
    }
    if values.len() != per_frame * m {
        return Err(Error::parse(
            path,
            1,
            format!("expected {} values, found {}", per_frame * m, values.len()),
        ));
    }
    let frames = values
        .chunks_exact(per_frame.max(1))
        .map(|chunk| FrameImage::new(w, h, c, chunk.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    if frames.is_empty() {
        return Err(Error::EmptyInput("raw fixture declares zero frames"));
    }
    Ok(DecodedVideo { fps, frames })
}

pub fn write_raw_video(path: impl AsRef<Path>, video: &DecodedVideo) -> Result<()> {
    let first = video
        .frames
        .first()
        .ok_or(Error::EmptyInput("cannot write a video with no frames"))?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {} {}",
        first.width(),
        first.height(),
        first.channels(),
        video.frames.len(),
        video.fps
    );
    for frame in &video.frames {
        if (frame.width(), frame.height(), frame.channels())
            != (first.width(), first.height(), first.channels())
        {
            return Err(Error::invalid(
                "all frames of a raw fixture must share one shape",
            ));
        }
        for row in frame.data().chunks(frame.width() * frame.channels()) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Decoder for the raw text fixture format.
#[derive(Debug, Default, Clone, Copy)]
pub struct RawFixtureDecoder;

impl VideoDecoder for RawFixtureDecoder {
    fn open(&self, path: &Path) -> Result<Box<dyn VideoSource>> {
        let video = read_raw_video(path).map_err(|e| match e {
            Error::Io(io) => Error::Decode {
                path: path.to_path_buf(),
                message: io.to_string(),
            },
            other => other,
        })?;
        Ok(Box::new(MemorySource::new(video)))
    }
}
