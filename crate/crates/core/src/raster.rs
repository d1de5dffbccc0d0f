//! Raster types shared by every stage of the pipeline.
//!
//! Pixels are stored row-major as `[f64; 3]` RGB triples. HDR rasters hold
//! linear scene radiance, LDR rasters hold display-referred values in `[0, 1]`.
//! Single-channel maps (luminance, brightness, contrast) use [`Plane`].

use crate::error::{Error, Result};

/// Rec. 709 luma weights applied to RGB.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2126, 0.7152, 0.0722];

#[inline]
pub fn rgb_luminance(p: [f64; 3]) -> f64 {
    LUMA_WEIGHTS[0] * p[0] + LUMA_WEIGHTS[1] * p[1] + LUMA_WEIGHTS[2] * p[2]
}

/// A single-channel raster of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// Per-pixel luminance.
pub type LuminanceMap = Plane;
/// Per-pixel fusion-area mean luminance, in `[0, 1]` for LDR input.
pub type BrightnessMap = Plane;
/// Per-pixel local contour contrast in percent units, `[0, 100]` for LDR input.
pub type ContrastMap = Plane;

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let var =
            self.data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.data.len() as f64;
        var.sqrt()
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "empty raster {width}x{height}"
        )));
    }
    let expected = width.checked_mul(height).ok_or(Error::DimensionOverflow {
        width: width as u64,
        height: height as u64,
    })?;
    if expected != len {
        return Err(Error::InvalidImage(format!(
            "{width}x{height} raster needs {expected} pixels, got {len}"
        )));
    }
    Ok(())
}

/// Linear-radiance RGB raster, the optimization input.
#[derive(Debug, Clone, PartialEq)]
pub struct HdrImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl HdrImage {
    /// Every channel must be finite and non-negative.
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if let Some(i) = pixels
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite() || *c < 0.0))
        {
            return Err(Error::InvalidImage(format!(
                "pixel {} is not finite and non-negative: {:?}",
                i, pixels[i]
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn luminance(&self) -> LuminanceMap {
        luminance_of(self.width, self.height, &self.pixels)
    }
}

/// Display-referred RGB raster with every channel in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdrImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl LdrImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if let Some(i) = pixels
            .iter()
            .position(|p| p.iter().any(|c| !(0.0..=1.0).contains(c)))
        {
            return Err(Error::InvalidImage(format!(
                "LDR pixel {} outside [0, 1]: {:?}",
                i, pixels[i]
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Builds an LDR raster from 8-bit RGB bytes (`v / 255`).
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width.saturating_mul(height).saturating_mul(3) {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} RGB8 buffer has {} bytes",
                bytes.len()
            )));
        }
        let pixels = bytes
            .chunks_exact(3)
            .map(|c| {
                [
                    c[0] as f64 / 255.0,
                    c[1] as f64 / 255.0,
                    c[2] as f64 / 255.0,
                ]
            })
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn luminance(&self) -> LuminanceMap {
        luminance_of(self.width, self.height, &self.pixels)
    }

    /// 8-bit RGB bytes, `round(clamp(v, 0, 1) * 255)` with halves rounded up.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.iter().map(|&c| quantize_u8(c)))
            .collect()
    }

    /// The image as it reads back from an 8-bit file.
    pub fn quantized(&self) -> LdrImage {
        let pixels = self
            .pixels
            .iter()
            .map(|p| p.map(|c| quantize_u8(c) as f64 / 255.0))
            .collect();
        LdrImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Round-half-up 8-bit quantization of a display value.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

fn luminance_of(width: usize, height: usize, pixels: &[[f64; 3]]) -> LuminanceMap {
    Plane {
        width,
        height,
        data: pixels.iter().map(|&p| rgb_luminance(p)).collect(),
    }
}

/// A left/right LDR pair together with the tone-mapping parameters that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct BinocularPair {
    pub left: LdrImage,
    pub right: LdrImage,
    pub beta_left: f64,
    pub beta_right: f64,
}

impl BinocularPair {
    pub fn new(left: LdrImage, right: LdrImage, beta_left: f64, beta_right: f64) -> Result<Self> {
        if left.dims() != right.dims() {
            return Err(Error::DimensionMismatch {
                left: left.dims(),
                right: right.dims(),
            });
        }
        Ok(Self {
            left,
            right,
            beta_left,
            beta_right,
        })
    }

    pub fn swapped(self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            beta_left: self.beta_right,
            beta_right: self.beta_left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StereoMode {
    SideBySide,
    /// Red from the left view's luminance, green and blue from the right view.
    Anaglyph,
}

pub fn compose_stereo(left: &LdrImage, right: &LdrImage, mode: StereoMode) -> Result<LdrImage> {
    if left.dims() != right.dims() {
        return Err(Error::DimensionMismatch {
            left: left.dims(),
            right: right.dims(),
        });
    }
    let (w, h) = left.dims();
    match mode {
        StereoMode::SideBySide => {
            let mut pixels = Vec::with_capacity(2 * w * h);
            for y in 0..h {
                pixels.extend_from_slice(&left.pixels[y * w..(y + 1) * w]);
                pixels.extend_from_slice(&right.pixels[y * w..(y + 1) * w]);
            }
            Ok(LdrImage {
                width: 2 * w,
                height: h,
                pixels,
            })
        }
        StereoMode::Anaglyph => {
            let pixels = left
                .pixels
                .iter()
                .zip(&right.pixels)
                .map(|(&l, &r)| [rgb_luminance(l).clamp(0.0, 1.0), r[1], r[2]])
                .collect();
            Ok(LdrImage {
                width: w,
                height: h,
                pixels,
            })
        }
    }
}

impl BinocularPair {
    pub fn compose(&self, mode: StereoMode) -> Result<LdrImage> {
        compose_stereo(&self.left, &self.right, mode)
    }
}
