//! The binocular perception energy of a candidate pair.
//!
//! `E = E_c + lambda1 * E_d + lambda2 * E_f` where
//!
//! * `E_c` is the mean, over all pixels, of how far the fused brightness of
//!   the pair strays from the contrast reference, normalized by the gap
//!   between the contrast and detail references;
//! * `E_d` is the mean, over detail-reference edge pixels, of how much fused
//!   contour contrast the pair loses against the detail reference, normalized
//!   by what the contrast reference loses;
//! * `E_f` is the fusibility penalty.
//!
//! Everything that depends only on the two references is computed once in
//! [`ReferenceModel`]; evaluating a pair is then a pass over its
//! [`ViewFeatures`].

use serde::{Deserialize, Serialize};

use crate::edges::EdgeMask;
use crate::error::{Error, Result};
use crate::fusibility::{
    fusibility_energy, FusibilityPredictor, FusibilityThresholds, RatioPredictor,
    DEFAULT_CONTRAST_FLOOR,
};
use crate::perception::{
    cos_degrees, fuse_brightness_cos, fuse_contrast, FusionParams, ViewFeatures,
};
use crate::raster::LdrImage;

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Default for EnergyWeights {
    fn default() -> Self {
        Self {
            lambda1: 1.25,
            lambda2: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    pub weights: EnergyWeights,
    pub fusion: FusionParams,
    pub thresholds: FusibilityThresholds,
    /// Denominator guard.
    pub epsilon: f64,
    /// Edge pixels where the detail reference's contour contrast exceeds the
    /// contrast reference's by less than this (in percent) are left out of
    /// `E_d`: their normalization is close to zero. 0 keeps every pixel with
    /// a positive gap.
    pub detail_contrast_floor: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            weights: EnergyWeights::default(),
            fusion: FusionParams::default(),
            thresholds: FusibilityThresholds::default(),
            epsilon: DEFAULT_EPSILON,
            detail_contrast_floor: DEFAULT_CONTRAST_FLOOR,
        }
    }
}

impl EnergyConfig {
    pub fn validate(&self) -> Result<()> {
        let EnergyWeights { lambda1, lambda2 } = self.weights;
        if !(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weights must be finite and >= 0, got lambda1={lambda1} lambda2={lambda2}"
            )));
        }
        let f = &self.fusion;
        if !(f.fusion_radius >= 0.0 && f.fusion_radius.is_finite() && f.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fusion radius must be finite and >= 0, got {} (alpha {})",
                f.fusion_radius, f.alpha
            )));
        }
        if !(f.s > 0.0 && f.t > 0.0 && f.z > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "contrast fusion constants must be > 0, got s={} t={} z={}",
                f.s, f.t, f.z
            )));
        }
        self.thresholds.validate()?;
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if !(self.detail_contrast_floor >= 0.0 && self.detail_contrast_floor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "detail contrast floor must be >= 0, got {}",
                self.detail_contrast_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_c: f64,
    pub e_d: f64,
    pub e_f: f64,
    pub e_total: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub n_pixels: usize,
    /// Edge pixels of the detail reference.
    pub n_edge_pixels: usize,
    /// Edge pixels left out of `e_d` because the contrast reference keeps at
    /// least as much fused contour contrast as the detail reference there.
    pub excluded_edge_pixels: usize,
    pub epsilon: f64,
}

impl EnergyBreakdown {
    pub fn recompute_total(&self) -> f64 {
        self.e_c + self.lambda1 * self.e_d + self.lambda2 * self.e_f
    }
}

/// `max(x, 0)`.
#[inline]
pub fn ramp(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        0.0
    }
}

/// Reference-side quantities of the energy, fixed for one HDR input.
pub struct ReferenceModel {
    config: EnergyConfig,
    dims: (usize, usize),
    cos_alpha: f64,
    /// Fused brightness of the contrast reference with itself.
    brightness_target: Vec<f64>,
    /// `|b_CC - b_DD| + eps` per pixel.
    brightness_norm: Vec<f64>,
    /// Edge pixels that take part in `E_d`.
    edge_pixels: Vec<usize>,
    /// Fused contour contrast of the detail reference at `edge_pixels`.
    contrast_target: Vec<f64>,
    /// `H(c_DD - c_CC) + eps` at `edge_pixels`.
    contrast_norm: Vec<f64>,
    n_edge_pixels: usize,
    predictor: Box<dyn FusibilityPredictor>,
}

impl std::fmt::Debug for ReferenceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceModel")
            .field("config", &self.config)
            .field("dims", &self.dims)
            .field("n_edge_pixels", &self.n_edge_pixels)
            .field("used_edge_pixels", &self.edge_pixels.len())
            .finish_non_exhaustive()
    }
}

impl ReferenceModel {
    pub fn new(
        contrast_ref: &ViewFeatures,
        detail_ref: &ViewFeatures,
        edges: &EdgeMask,
        config: EnergyConfig,
    ) -> Result<Self> {
        let dims = contrast_ref.dims();
        for other in [detail_ref.dims(), edges.dims()] {
            if other != dims {
                return Err(Error::DimensionMismatch {
                    left: dims,
                    right: other,
                });
            }
        }
        config.validate()?;
        let eps = config.epsilon;
        let cos_alpha = cos_degrees(config.fusion.alpha);
        let fp = &config.fusion;

        let bc = contrast_ref.brightness.data();
        let bd = detail_ref.brightness.data();
        let brightness_target: Vec<f64> = bc
            .iter()
            .map(|&b| fuse_brightness_cos(b, b, cos_alpha))
            .collect();
        let brightness_norm = brightness_target
            .iter()
            .zip(bd)
            .map(|(&t, &d)| (t - fuse_brightness_cos(d, d, cos_alpha)).abs() + eps)
            .collect();

        let cc = contrast_ref.contrast.data();
        let cd = detail_ref.contrast.data();
        let mut edge_pixels = Vec::new();
        let mut contrast_target = Vec::new();
        let mut contrast_norm = Vec::new();
        for i in edges.indices() {
            let target = fuse_contrast(cd[i], cd[i], fp);
            let gap = ramp(target - fuse_contrast(cc[i], cc[i], fp));
            if gap > 0.0 && cd[i] - cc[i] >= config.detail_contrast_floor {
                edge_pixels.push(i);
                contrast_target.push(target);
                contrast_norm.push(gap + eps);
            }
        }
        let n_edge_pixels = edges.count();
        if edge_pixels.is_empty() {
            log::warn!(
                "no usable edge pixels in the detail reference ({n_edge_pixels} detected); detail term is 0"
            );
        }
        Ok(Self {
            config,
            dims,
            cos_alpha,
            brightness_target,
            brightness_norm,
            edge_pixels,
            contrast_target,
            contrast_norm,
            n_edge_pixels,
            predictor: Box::new(RatioPredictor {
                thresholds: config.thresholds,
            }),
        })
    }

    pub fn from_images(
        contrast_ref: &LdrImage,
        detail_ref: &LdrImage,
        edges: &EdgeMask,
        config: EnergyConfig,
    ) -> Result<Self> {
        if contrast_ref.dims() != detail_ref.dims() {
            return Err(Error::DimensionMismatch {
                left: contrast_ref.dims(),
                right: detail_ref.dims(),
            });
        }
        Self::new(
            &ViewFeatures::compute(contrast_ref, &config.fusion),
            &ViewFeatures::compute(detail_ref, &config.fusion),
            edges,
            config,
        )
    }

    /// Swaps in a different fusibility predictor.
    pub fn with_predictor(mut self, predictor: Box<dyn FusibilityPredictor>) -> Self {
        self.predictor = predictor;
        self
    }

    pub fn config(&self) -> &EnergyConfig {
        &self.config
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn used_edge_pixels(&self) -> usize {
        self.edge_pixels.len()
    }

    fn check(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<()> {
        for v in [left, right] {
            if v.dims() != self.dims {
                return Err(Error::DimensionMismatch {
                    left: self.dims,
                    right: v.dims(),
                });
            }
        }
        Ok(())
    }

    pub fn contrast_term(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<f64> {
        self.check(left, right)?;
        let bl = left.brightness.data();
        let br = right.brightness.data();
        let sum: f64 = (0..self.brightness_target.len())
            .map(|i| {
                let fused = fuse_brightness_cos(bl[i], br[i], self.cos_alpha);
                (self.brightness_target[i] - fused).abs() / self.brightness_norm[i]
            })
            .sum();
        Ok(sum / self.brightness_target.len() as f64)
    }

    pub fn detail_term(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<f64> {
        self.check(left, right)?;
        if self.edge_pixels.is_empty() {
            return Ok(0.0);
        }
        let cl = left.contrast.data();
        let cr = right.contrast.data();
        let fp = &self.config.fusion;
        let sum: f64 = self
            .edge_pixels
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                ramp(self.contrast_target[k] - fuse_contrast(cl[i], cr[i], fp))
                    / self.contrast_norm[k]
            })
            .sum();
        Ok(sum / self.edge_pixels.len() as f64)
    }

    pub fn fusibility_term(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<f64> {
        self.check(left, right)?;
        Ok(fusibility_energy(&self.predictor.predict(left, right)?))
    }

    pub fn evaluate(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<EnergyBreakdown> {
        self.evaluate_weighted(left, right, self.config.weights)
    }

    /// Full breakdown under explicit weights. A zero `lambda1` skips the
    /// detail term (reported as 0).
    pub fn evaluate_weighted(
        &self,
        left: &ViewFeatures,
        right: &ViewFeatures,
        weights: EnergyWeights,
    ) -> Result<EnergyBreakdown> {
        let e_c = self.contrast_term(left, right)?;
        let e_d = if weights.lambda1 == 0.0 {
            0.0
        } else {
            self.detail_term(left, right)?
        };
        let e_f = self.fusibility_term(left, right)?;
        Ok(EnergyBreakdown {
            e_c,
            e_d,
            e_f,
            e_total: e_c + weights.lambda1 * e_d + weights.lambda2 * e_f,
            lambda1: weights.lambda1,
            lambda2: weights.lambda2,
            n_pixels: self.dims.0 * self.dims.1,
            n_edge_pixels: self.n_edge_pixels,
            excluded_edge_pixels: self.n_edge_pixels - self.edge_pixels.len(),
            epsilon: self.config.epsilon,
        })
    }

    /// `|E_d(L, R) - E_d(R, L)|`: the contrast-fusion model is asymmetric, so
    /// swapping views can move the detail term.
    pub fn detail_swap_delta(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<f64> {
        Ok((self.detail_term(left, right)? - self.detail_term(right, left)?).abs())
    }
}

/// Images of one candidate evaluation: the pair and both references.
#[derive(Debug, Clone, Copy)]
pub struct Quad<'a> {
    pub left: &'a LdrImage,
    pub right: &'a LdrImage,
    pub contrast_ref: &'a LdrImage,
    pub detail_ref: &'a LdrImage,
}

impl Quad<'_> {
    fn check(&self) -> Result<()> {
        let dims = self.contrast_ref.dims();
        for img in [self.left, self.right, self.detail_ref] {
            if img.dims() != dims {
                return Err(Error::DimensionMismatch {
                    left: dims,
                    right: img.dims(),
                });
            }
        }
        Ok(())
    }
}

pub fn contrast_term(q: Quad<'_>, fusion: &FusionParams) -> Result<f64> {
    q.check()?;
    let config = EnergyConfig {
        fusion: *fusion,
        ..EnergyConfig::default()
    };
    let (w, h) = q.left.dims();
    let model =
        ReferenceModel::from_images(q.contrast_ref, q.detail_ref, &EdgeMask::empty(w, h), config)?;
    model.contrast_term(
        &ViewFeatures::compute(q.left, fusion),
        &ViewFeatures::compute(q.right, fusion),
    )
}

pub fn detail_term(q: Quad<'_>, edges: &EdgeMask, fusion: &FusionParams) -> Result<f64> {
    q.check()?;
    let config = EnergyConfig {
        fusion: *fusion,
        ..EnergyConfig::default()
    };
    let model = ReferenceModel::from_images(q.contrast_ref, q.detail_ref, edges, config)?;
    model.detail_term(
        &ViewFeatures::compute(q.left, fusion),
        &ViewFeatures::compute(q.right, fusion),
    )
}

pub fn total_energy(
    q: Quad<'_>,
    edges: &EdgeMask,
    config: &EnergyConfig,
) -> Result<EnergyBreakdown> {
    q.check()?;
    let model = ReferenceModel::from_images(q.contrast_ref, q.detail_ref, edges, *config)?;
    model.evaluate(
        &ViewFeatures::compute(q.left, &config.fusion),
        &ViewFeatures::compute(q.right, &config.fusion),
    )
}
