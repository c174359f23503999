use std::path::Path;

use crate::{Error, Result};

/// A decoded frame: row-major, interleaved channels, intensities on the
/// `[0, 255]` scale stored as `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl FrameImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "frames carry 1 or 3 channels, got {channels}"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some(v) = data
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 255.0)
        {
            return Err(Error::invalid(format!("intensity {v} outside [0, 255]")));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds a frame from values that are clamped into `[0, 255]` first.
    /// Non-finite values are rejected.
    pub fn from_clamped(
        width: usize,
        height: usize,
        channels: usize,
        mut data: Vec<f32>,
    ) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite intensity"));
        }
        for v in &mut data {
            *v = v.clamp(0.0, 255.0);
        }
        Self::new(width, height, channels, data)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Single-channel frame from a closure over `(x, y)`; results are clamped.
    pub fn from_fn_luma(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_clamped(width, height, 1, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn is_luma(&self) -> bool {
        self.channels == 1
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Copy of the intensities as `f64`, row-major (single-channel frames only).
    pub fn luma_f64(&self) -> Result<Vec<f64>> {
        if !self.is_luma() {
            return Err(Error::invalid(format!(
                "expected a single-channel frame, got {} channels",
                self.channels
            )));
        }
        Ok(self.data.iter().map(|&v| f64::from(v)).collect())
    }

    /// Loads an 8-bit image file (PNG); colour images keep three channels.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path.as_ref())?;
        let frame = if img.color().has_color() {
            let rgb = img.to_rgb8();
            let (w, h) = rgb.dimensions();
            Self::new(
                w as usize,
                h as usize,
                3,
                rgb.into_raw().into_iter().map(f32::from).collect(),
            )?
        } else {
            let gray = img.to_luma8();
            let (w, h) = gray.dimensions();
            Self::new(
                w as usize,
                h as usize,
                1,
                gray.into_raw().into_iter().map(f32::from).collect(),
            )?
        };
        Ok(frame)
    }

    /// Writes an 8-bit PNG, rounding intensities.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes: Vec<u8> = self.data.iter().map(|v| v.round() as u8).collect();
        let color = if self.is_luma() {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer(
            path.as_ref(),
            &bytes,
            self.width as u32,
            self.height as u32,
            color,
        )?;
        Ok(())
    }

    /// Crops a `width x height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::invalid(format!(
                "crop {width}x{height}+{x0}+{y0} outside {}x{} frame",
                self.width, self.height
            )));
        }
        let c = self.channels;
        let mut data = Vec::with_capacity(width * height * c);
        for y in y0..y0 + height {
            let start = (y * self.width + x0) * c;
            data.extend_from_slice(&self.data[start..start + width * c]);
        }
        Self::new(width, height, c, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_ranges() {
        assert!(FrameImage::new(0, 2, 1, vec![]).is_err());
        assert!(FrameImage::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(FrameImage::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(FrameImage::new(1, 1, 1, vec![256.0]).is_err());
        assert!(FrameImage::new(1, 1, 1, vec![f32::NAN]).is_err());
        let clamped = FrameImage::from_clamped(2, 1, 1, vec![-3.0, 300.0]).unwrap();
        assert_eq!(clamped.data(), &[0.0, 255.0]);
    }

    #[test]
    fn crop_extracts_window() {
        let f = FrameImage::from_fn_luma(4, 3, |x, y| (x + 10 * y) as f32).unwrap();
        let c = f.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.data(), &[11.0, 12.0, 21.0, 22.0]);
        assert!(f.crop(3, 0, 2, 1).is_err());
    }
}
