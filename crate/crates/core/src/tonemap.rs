//! Base/detail bilateral tone mapping.
//!
//! Log-luminance is split into a bilateral-filtered base layer and a residual
//! detail layer. The base layer is rescaled so that its log10 range becomes
//! `log10(beta)`, anchored so the brightest base value maps to display white;
//! the detail layer is added back untouched. Colour is carried by the
//! per-pixel ratio `C / Y`.

use rayon::prelude::*;

use crate::bilateral::{bilateral_exact, bilateral_fast_with, FastBilateralConfig};
use crate::error::{Error, Result};
use crate::raster::{HdrImage, LdrImage, Plane};

/// Beta of the contrast reference image.
pub const BETA_CONTRAST_REF: f64 = 6.0;
/// Beta of the detail reference image.
pub const BETA_DETAIL_REF: f64 = 1.5;
pub const BETA_MIN: f64 = BETA_DETAIL_REF;
pub const BETA_MAX: f64 = BETA_CONTRAST_REF;
/// Luminance floor applied before taking log10.
pub const LUMINANCE_FLOOR: f64 = 1e-6;

/// Operator settings shared by every beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    /// Spatial sigma in pixels; `None` means 2% of the shorter image side.
    pub sigma_space: Option<f64>,
    /// Range sigma in log10-luminance units.
    pub sigma_range: f64,
    pub gamma: f64,
    /// Use the brute-force bilateral filter instead of the layered one.
    pub exact_bilateral: bool,
    pub fast: FastBilateralConfig,
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self {
            sigma_space: None,
            sigma_range: 0.4,
            gamma: 2.2,
            exact_bilateral: false,
            fast: FastBilateralConfig::default(),
        }
    }
}

impl OperatorParams {
    pub fn sigma_space_for(&self, width: usize, height: usize) -> f64 {
        self.sigma_space
            .unwrap_or_else(|| 0.02 * width.min(height) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigma_space {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "sigma_space must be > 0, got {s}"
                )));
            }
        }
        if self.sigma_range.is_nan() || self.sigma_range <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma_range must be > 0, got {}",
                self.sigma_range
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneMapParams {
    /// Target base-layer contrast; the compressed base spans `log10(beta)`.
    pub beta: f64,
    pub operator: OperatorParams,
}

impl ToneMapParams {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            operator: OperatorParams::default(),
        }
    }
}

pub fn check_beta(beta: f64) -> Result<()> {
    if !(BETA_MIN..=BETA_MAX).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta {beta} outside [{BETA_MIN}, {BETA_MAX}]"
        )));
    }
    Ok(())
}

/// Bilateral decomposition of log10 luminance.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseDetail {
    pub base: Plane,
    pub detail: Plane,
}

impl BaseDetail {
    pub fn reconstruct(&self) -> Plane {
        let data = self
            .base
            .data()
            .iter()
            .zip(self.detail.data())
            .map(|(b, d)| b + d)
            .collect();
        Plane::new(self.base.width(), self.base.height(), data).expect("same dims")
    }
}

pub fn log_luminance(img: &HdrImage) -> Plane {
    img.luminance().map(|y| y.max(LUMINANCE_FLOOR).log10())
}

pub fn decompose(img: &HdrImage, operator: &OperatorParams) -> BaseDetail {
    let log_y = log_luminance(img);
    let sigma_space = operator.sigma_space_for(img.width(), img.height());
    let base = if operator.exact_bilateral {
        bilateral_exact(&log_y, sigma_space, operator.sigma_range)
    } else {
        bilateral_fast_with(&log_y, sigma_space, operator.sigma_range, &operator.fast)
    };
    let detail = Plane::new(
        log_y.width(),
        log_y.height(),
        log_y
            .data()
            .iter()
            .zip(base.data())
            .map(|(l, b)| l - b)
            .collect(),
    )
    .expect("same dims");
    BaseDetail { base, detail }
}

/// A decomposed HDR image, ready to be rendered at any beta.
///
/// The bilateral pass does not depend on beta, so it runs once here and
/// [`ToneMapper::apply`] is a cheap per-pixel pass.
#[derive(Debug, Clone)]
pub struct ToneMapper {
    width: usize,
    height: usize,
    layers: BaseDetail,
    base_max: f64,
    base_range: f64,
    chroma: Vec<[f64; 3]>,
    gamma: f64,
}

impl ToneMapper {
    pub fn new(img: &HdrImage, operator: &OperatorParams) -> Result<Self> {
        operator.validate()?;
        let layers = decompose(img, operator);
        let (base_min, base_max) = layers.base.min_max();
        let chroma = img
            .pixels()
            .iter()
            .map(|&p| {
                let y = crate::raster::rgb_luminance(p).max(LUMINANCE_FLOOR);
                [p[0] / y, p[1] / y, p[2] / y]
            })
            .collect();
        Ok(Self {
            width: img.width(),
            height: img.height(),
            layers,
            base_max,
            base_range: base_max - base_min,
            chroma,
            gamma: operator.gamma,
        })
    }

    pub fn layers(&self) -> &BaseDetail {
        &self.layers
    }

    /// Base-layer scale factor; 1 when the base layer is flat.
    pub fn compression(&self, beta: f64) -> f64 {
        if self.base_range > 0.0 {
            beta.log10() / self.base_range
        } else {
            1.0
        }
    }

    /// Compressed base layer, anchored at zero for the brightest base value.
    pub fn compressed_base(&self, beta: f64) -> Plane {
        let k = self.compression(beta);
        self.layers.base.map(|b| (b - self.base_max) * k)
    }

    pub fn apply(&self, beta: f64) -> Result<LdrImage> {
        check_beta(beta)?;
        let k = self.compression(beta);
        let inv_gamma = 1.0 / self.gamma;
        let base = self.layers.base.data();
        let detail = self.layers.detail.data();
        let pixels: Vec<[f64; 3]> = (0..self.width * self.height)
            .into_par_iter()
            .map(|i| {
                let y = 10f64.powf((base[i] - self.base_max) * k + detail[i]);
                let c = self.chroma[i];
                let enc = |v: f64| (v * y).clamp(0.0, 1.0).powf(inv_gamma);
                [enc(c[0]), enc(c[1]), enc(c[2])]
            })
            .collect();
        LdrImage::new(self.width, self.height, pixels)
    }
}

pub fn tonemap(img: &HdrImage, params: &ToneMapParams) -> Result<LdrImage> {
    check_beta(params.beta)?;
    ToneMapper::new(img, &params.operator)?.apply(params.beta)
}

/// The contrast reference (beta 6.0) and detail reference (beta 1.5).
#[derive(Debug, Clone)]
pub struct References {
    pub contrast: LdrImage,
    pub detail: LdrImage,
}

impl References {
    /// Both references at 8-bit precision.
    pub fn quantized(&self) -> References {
        References {
            contrast: self.contrast.quantized(),
            detail: self.detail.quantized(),
        }
    }
}

pub fn make_references(img: &HdrImage) -> Result<References> {
    make_references_with(img, &OperatorParams::default())
}

pub fn make_references_with(img: &HdrImage, operator: &OperatorParams) -> Result<References> {
    let mapper = ToneMapper::new(img, operator)?;
    Ok(References {
        contrast: mapper.apply(BETA_CONTRAST_REF)?,
        detail: mapper.apply(BETA_DETAIL_REF)?,
    })
}
