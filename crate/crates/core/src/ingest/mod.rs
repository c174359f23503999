//! Frame sampling and the three per-video views consumed by the indexes.
//!
//! Container demuxing and codec work happen outside this crate: a
//! [`VideoDecoder`] hands over frames plus a frame rate and nothing else.

mod raw;
pub(crate) mod resample;

use std::path::Path;

pub use raw::{read_raw_video, write_raw_video, RawFixtureDecoder};
pub use resample::resize_bicubic;

use crate::{Error, FrameImage, Result};

const LUMA_WEIGHTS: [f32; 3] = [0.299, 0.587, 0.114];

/// `samples` indices spread uniformly over `total_frames`, using the
/// centred rule `floor((i + 0.5) * M / N)`. Repeats indices when `N > M`.
pub fn sample_uniform_indices(total_frames: usize, samples: usize) -> Result<Vec<usize>> {
    if total_frames == 0 {
        return Err(Error::EmptyInput("cannot sample from zero frames"));
    }
    if samples == 0 {
        return Err(Error::EmptyInput("requested zero samples"));
    }
    // floor((2i + 1) * M / 2N), exact in integers
    let (m, n) = (total_frames as u128, samples as u128);
    Ok((0..n)
        .map(|i| ((2 * i + 1) * m / (2 * n)) as usize)
        .collect())
}

/// BT.601 luma of an RGB frame.
pub fn rgb_to_luma(frame: &FrameImage) -> Result<FrameImage> {
    if frame.channels() != 3 {
        return Err(Error::invalid(format!(
            "rgb_to_luma expects 3 channels, got {}",
            frame.channels()
        )));
    }
    let data = frame
        .data()
        .chunks_exact(3)
        .map(|px| {
            let y = LUMA_WEIGHTS[0] * px[0] + LUMA_WEIGHTS[1] * px[1] + LUMA_WEIGHTS[2] * px[2];
            y.clamp(0.0, 255.0)
        })
        .collect();
    FrameImage::new(frame.width(), frame.height(), 1, data)
}

/// Luma of any frame: identity copy for single-channel input.
pub fn to_luma(frame: &FrameImage) -> Result<FrameImage> {
    if frame.is_luma() {
        Ok(frame.clone())
    } else {
        rgb_to_luma(frame)
    }
}

fn to_rgb(frame: &FrameImage) -> FrameImage {
    if frame.channels() == 3 {
        return frame.clone();
    }
    let data = frame.data().iter().flat_map(|&v| [v, v, v]).collect();
    FrameImage::new(frame.width(), frame.height(), 3, data).expect("expanded luma is a valid frame")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewConfig {
    /// Frames in the aesthetic view.
    pub aesthetic_frames: usize,
    pub aesthetic_width: usize,
    pub aesthetic_height: usize,
    /// Temporal-view size for landscape sources; swapped for portrait.
    pub temporal_long_side: usize,
    pub temporal_short_side: usize,
}

impl Default for ViewConfig {
    fn default() -> Self {
        Self {
            aesthetic_frames: 32,
            aesthetic_width: 224,
            aesthetic_height: 224,
            temporal_long_side: 480,
            temporal_short_side: 270,
        }
    }
}

impl ViewConfig {
    fn validate(&self) -> Result<()> {
        if self.aesthetic_frames == 0
            || self.aesthetic_width == 0
            || self.aesthetic_height == 0
            || self.temporal_long_side == 0
            || self.temporal_short_side == 0
        {
            return Err(Error::invalid("view configuration sizes must be positive"));
        }
        Ok(())
    }

    /// `(width, height)` of the temporal view for a source of the given size.
    pub fn temporal_size(&self, width: usize, height: usize) -> (usize, usize) {
        if width >= height {
            (self.temporal_long_side, self.temporal_short_side)
        } else {
            (self.temporal_short_side, self.temporal_long_side)
        }
    }
}

/// The per-video inputs of the three indexes.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoViews {
    /// Uniformly sampled RGB frames at the aesthetic resolution.
    pub aesthetic: Vec<FrameImage>,
    /// Source frame index of each aesthetic frame.
    pub aesthetic_indices: Vec<usize>,
    /// One native-resolution luma frame per second.
    pub spatial: Vec<FrameImage>,
    pub spatial_indices: Vec<usize>,
    /// Every source frame, resized and converted to luma.
    pub temporal: Vec<FrameImage>,
    /// S0: number of 1 fps samples.
    pub duration_seconds: usize,
    /// M: decoded frame count.
    pub native_frame_count: usize,
    pub fps: f64,
}

/// Indices of the 1 fps spatial samples: `floor(k * fps)` for
/// `k = 0..ceil(M / fps)`, clamped to the last frame.
pub fn spatial_sample_indices(total_frames: usize, fps: f64) -> Result<Vec<usize>> {
    if total_frames == 0 {
        return Err(Error::EmptyInput("cannot sample from zero frames"));
    }
    check_fps(fps)?;
    let count = (total_frames as f64 / fps).ceil().max(1.0) as usize;
    Ok((0..count)
        .map(|k| ((k as f64 * fps).floor() as usize).min(total_frames - 1))
        .collect())
}

fn check_fps(fps: f64) -> Result<()> {
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::invalid(format!(
            "frame rate must be positive, got {fps}"
        )));
    }
    Ok(())
}

/// Incremental view construction: frames are pushed in decode order, so a
/// long video never has to be held at native resolution.
pub struct ViewBuilder {
    config: ViewConfig,
    fps: f64,
    frame_count_hint: Option<usize>,
    aesthetic_plan: Option<Vec<usize>>,
    aesthetic_pool: Vec<(usize, FrameImage)>,
    spatial: Vec<(usize, FrameImage)>,
    next_spatial_k: usize,
    temporal: Vec<FrameImage>,
    dims: Option<(usize, usize)>,
    count: usize,
}

impl ViewBuilder {
    /// `frame_count_hint`, when it is exact, lets the builder resize only the
    /// frames the aesthetic view needs.
    pub fn new(fps: f64, config: ViewConfig, frame_count_hint: Option<usize>) -> Result<Self> {
        check_fps(fps)?;
        config.validate()?;
        let aesthetic_plan = match frame_count_hint {
            Some(m) if m > 0 => Some(sample_uniform_indices(m, config.aesthetic_frames)?),
            _ => None,
        };
        Ok(Self {
            config,
            fps,
            frame_count_hint,
            aesthetic_plan,
            aesthetic_pool: Vec::new(),
            spatial: Vec::new(),
            next_spatial_k: 0,
            temporal: Vec::new(),
            dims: None,
            count: 0,
        })
    }

    pub fn push(&mut self, frame: &FrameImage) -> Result<()> {
        let index = self.count;
        match self.dims {
            None => self.dims = Some((frame.width(), frame.height())),
            Some((w, h)) if (w, h) != (frame.width(), frame.height()) => {
                return Err(Error::invalid(format!(
                    "frame {index} is {}x{}, earlier frames are {w}x{h}",
                    frame.width(),
                    frame.height()
                )));
            }
            Some(_) => {}
        }

        let wanted = match &self.aesthetic_plan {
            Some(plan) => plan.binary_search(&index).is_ok(),
            None => true,
        };
        if wanted {
            let rgb = to_rgb(frame);
            let small = resize_bicubic(
                &rgb,
                self.config.aesthetic_width,
                self.config.aesthetic_height,
            )?;
            self.aesthetic_pool.push((index, small));
        }

        let luma = to_luma(frame)?;
        while (self.next_spatial_k as f64 * self.fps).floor() as usize == index {
            self.spatial.push((self.next_spatial_k, luma.clone()));
            self.next_spatial_k += 1;
        }

        let (tw, th) = self.config.temporal_size(frame.width(), frame.height());
        self.temporal.push(resize_bicubic(&luma, tw, th)?);
        self.count += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<VideoViews> {
        let m = self.count;
        if m == 0 {
            return Err(Error::EmptyInput("video has no decodable frames"));
        }
        if let Some(hint) = self.frame_count_hint {
            if hint != m {
                log::warn!("frame-count hint {hint} differs from decoded count {m}; resampling aesthetic view");
            }
        }
        let aesthetic_indices = sample_uniform_indices(m, self.config.aesthetic_frames)?;
        let mut aesthetic = Vec::with_capacity(aesthetic_indices.len());
        for &i in &aesthetic_indices {
            let frame = match self.aesthetic_pool.binary_search_by_key(&i, |(j, _)| *j) {
                Ok(pos) => self.aesthetic_pool[pos].1.clone(),
                // Only reachable when the count hint was wrong.
                Err(_) => {
                    return Err(Error::invalid(format!(
                        "aesthetic frame {i} was not retained; frame-count hint was inaccurate"
                    )))
                }
            };
            aesthetic.push(frame);
        }

        let spatial_indices = spatial_sample_indices(m, self.fps)?;
        let s0 = spatial_indices.len();
        // floor(k * fps) < M for every k < ceil(M / fps), so every sample
        // was captured during push.
        let spatial: Vec<FrameImage> = self.spatial.into_iter().take(s0).map(|(_, f)| f).collect();
        if spatial.len() != s0 {
            return Err(Error::invalid(
                "spatial sampling fell outside the decoded frames",
            ));
        }

        Ok(VideoViews {
            aesthetic,
            aesthetic_indices,
            spatial,
            spatial_indices,
            temporal: self.temporal,
            duration_seconds: s0,
            native_frame_count: m,
            fps: self.fps,
        })
    }
}

/// Builds all three views from an in-memory decoded frame list.
pub fn make_views(
    decoded_frames: &[FrameImage],
    fps: f64,
    config: &ViewConfig,
) -> Result<VideoViews> {
    if decoded_frames.is_empty() {
        return Err(Error::EmptyInput("video has no decodable frames"));
    }
    let mut builder = ViewBuilder::new(fps, config.clone(), Some(decoded_frames.len()))?;
    for frame in decoded_frames {
        builder.push(frame)?;
    }
    builder.finish()
}

/// A decoded video held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedVideo {
    pub fps: f64,
    pub frames: Vec<FrameImage>,
}

/// Frame-by-frame access to one video.
pub trait VideoSource {
    fn fps(&self) -> f64;
    /// Exact frame count when the container declares it.
    fn frame_count_hint(&self) -> Option<usize> {
        None
    }
    fn next_frame(&mut self) -> Result<Option<FrameImage>>;
}

/// Opens media files; implementations own all container and codec handling.
pub trait VideoDecoder: Send + Sync {
    fn open(&self, path: &Path) -> Result<Box<dyn VideoSource>>;
}

/// A [`VideoSource`] over frames already in memory.
pub struct MemorySource {
    fps: f64,
    total: usize,
    frames: std::vec::IntoIter<FrameImage>,
}

impl MemorySource {
    pub fn new(video: DecodedVideo) -> Self {
        Self {
            fps: video.fps,
            total: video.frames.len(),
            frames: video.frames.into_iter(),
        }
    }
}

impl VideoSource for MemorySource {
    fn fps(&self) -> f64 {
        self.fps
    }

    fn frame_count_hint(&self) -> Option<usize> {
        Some(self.total)
    }

    fn next_frame(&mut self) -> Result<Option<FrameImage>> {
        Ok(self.frames.next())
    }
}

/// Streams a source through a [`ViewBuilder`].
pub fn views_from_source(source: &mut dyn VideoSource, config: &ViewConfig) -> Result<VideoViews> {
    let mut builder = ViewBuilder::new(source.fps(), config.clone(), source.frame_count_hint())?;
    while let Some(frame) = source.next_frame()? {
        builder.push(&frame)?;
    }
    builder.finish()
}
