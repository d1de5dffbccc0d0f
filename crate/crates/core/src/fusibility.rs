//! Binocular fusibility: per-pixel discomfort ratios and the soft penalty on
//! them.
//!
//! A predictor yields two ratios per pixel, a contour-fusion ratio and a
//! region-contrast-fusion ratio, each normalized so that 1.0 is the comfort
//! boundary. [`RatioPredictor`] is the built-in predictor; anything
//! implementing [`FusibilityPredictor`] can replace it.

use crate::error::{Error, Result};
use crate::perception::{FusionParams, ViewFeatures};
use crate::raster::{LdrImage, Plane};

/// One 8-bit code value, in contour-contrast percent.
pub const DEFAULT_CONTRAST_FLOOR: f64 = 100.0 / 255.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusibilityThresholds {
    /// Largest comfortable contour-contrast mismatch, as a fraction of the
    /// stronger view's contrast.
    pub theta_cf: f64,
    /// Largest comfortable fusion-area brightness difference.
    pub theta_rf: f64,
    /// Added to the contour-ratio denominator, in contrast percent. Keeps
    /// contrasts below what an 8-bit display can show from being flagged.
    pub contrast_floor: f64,
}

impl Default for FusibilityThresholds {
    fn default() -> Self {
        Self {
            theta_cf: 0.8,
            theta_rf: 0.6,
            contrast_floor: DEFAULT_CONTRAST_FLOOR,
        }
    }
}

impl FusibilityThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_cf > 0.0 && self.theta_rf > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fusibility thresholds must be > 0, got cf={} rf={}",
                self.theta_cf, self.theta_rf
            )));
        }
        if !(self.contrast_floor > 0.0 && self.contrast_floor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "contrast floor must be > 0, got {}",
                self.contrast_floor
            )));
        }
        Ok(())
    }
}

/// Per-pixel discomfort ratios; a value above 1 predicts a fusion failure.
#[derive(Debug, Clone, PartialEq)]
pub struct FusibilityMap {
    pub contour: Plane,
    pub region: Plane,
}

impl FusibilityMap {
    pub fn infusible_pixels(&self) -> usize {
        self.contour
            .data()
            .iter()
            .zip(self.region.data())
            .filter(|(c, r)| **c > 1.0 || **r > 1.0)
            .count()
    }
}

pub trait FusibilityPredictor: Send + Sync {
    fn predict(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<FusibilityMap>;
}

/// Built-in predictor:
///
/// * contour ratio `|cL - cR| / (theta_cf * max(cL, cR) + floor)` on 3x3
///   contour contrast,
/// * region ratio `|bL - bR| / theta_rf` on fusion-area brightness.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioPredictor {
    pub thresholds: FusibilityThresholds,
}

impl FusibilityPredictor for RatioPredictor {
    fn predict(&self, left: &ViewFeatures, right: &ViewFeatures) -> Result<FusibilityMap> {
        if left.dims() != right.dims() {
            return Err(Error::DimensionMismatch {
                left: left.dims(),
                right: right.dims(),
            });
        }
        let (w, h) = left.dims();
        let t = self.thresholds;
        let contour = left
            .contrast
            .data()
            .iter()
            .zip(right.contrast.data())
            .map(|(&l, &r)| contour_ratio(l, r, t.theta_cf, t.contrast_floor))
            .collect();
        let region = left
            .brightness
            .data()
            .iter()
            .zip(right.brightness.data())
            .map(|(&l, &r)| (l - r).abs() / t.theta_rf)
            .collect();
        Ok(FusibilityMap {
            contour: Plane::new(w, h, contour)?,
            region: Plane::new(w, h, region)?,
        })
    }
}

#[inline]
pub fn contour_ratio(left: f64, right: f64, theta_cf: f64, floor: f64) -> f64 {
    (left - right).abs() / (theta_cf * left.max(right) + floor)
}

/// `max(x - 1, 0)`: zero inside the comfort zone, linear beyond it.
#[inline]
pub fn phi(x: f64) -> f64 {
    (x - 1.0).max(0.0)
}

pub fn fusibility_maps(
    left: &LdrImage,
    right: &LdrImage,
    thresholds: &FusibilityThresholds,
    fusion: &FusionParams,
) -> Result<FusibilityMap> {
    if left.dims() != right.dims() {
        return Err(Error::DimensionMismatch {
            left: left.dims(),
            right: right.dims(),
        });
    }
    thresholds.validate()?;
    let predictor = RatioPredictor {
        thresholds: *thresholds,
    };
    predictor.predict(
        &ViewFeatures::compute(left, fusion),
        &ViewFeatures::compute(right, fusion),
    )
}

/// Mean over pixels of `phi(contour) + phi(region)`.
pub fn fusibility_energy(maps: &FusibilityMap) -> f64 {
    let n = maps.contour.len();
    let sum: f64 = maps
        .contour
        .data()
        .iter()
        .zip(maps.region.data())
        .map(|(&c, &r)| phi(c) + phi(r))
        .sum();
    sum / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> LdrImage {
        LdrImage::from_fn(w, h, |x, y| [f(x, y); 3]).unwrap()
    }

    fn defaults() -> (FusibilityThresholds, FusionParams) {
        (FusibilityThresholds::default(), FusionParams::default())
    }

    #[test]
    fn identical_views_are_fusible() {
        let (t, f) = defaults();
        let v = gray(24, 18, |x, y| ((x * 7 + y * 13) % 17) as f64 / 16.0);
        let maps = fusibility_maps(&v, &v, &t, &f).unwrap();
        assert!(maps.contour.data().iter().all(|&c| c == 0.0));
        assert!(maps.region.data().iter().all(|&r| r == 0.0));
        assert_eq!(fusibility_energy(&maps), 0.0);
    }

    #[test]
    fn constant_brightness_offsets() {
        let (t, f) = defaults();
        let a = gray(10, 10, |_, _| 0.8);
        let b = gray(10, 10, |_, _| 0.5);
        let maps = fusibility_maps(&a, &b, &t, &f).unwrap();
        for &r in maps.region.data() {
            assert!((r - 0.3 / 0.6).abs() < 1e-12);
        }
        assert_eq!(fusibility_energy(&maps), 0.0);

        let c = gray(10, 10, |_, _| 0.95);
        let d = gray(10, 10, |_, _| 0.05);
        let maps = fusibility_maps(&c, &d, &t, &f).unwrap();
        for &r in maps.region.data() {
            assert!((r - 1.5).abs() < 1e-12);
        }
        assert_eq!(maps.infusible_pixels(), 100);
        assert!((fusibility_energy(&maps) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn energy_of_handmade_maps() {
        let maps = FusibilityMap {
            contour: Plane::filled(3, 2, 0.0),
            region: Plane::filled(3, 2, 1.5),
        };
        assert!((fusibility_energy(&maps) - 0.5).abs() < 1e-15);
        let calm = FusibilityMap {
            contour: Plane::filled(3, 2, 1.0),
            region: Plane::filled(3, 2, 0.99),
        };
        assert_eq!(fusibility_energy(&calm), 0.0);
    }

    #[test]
    fn mismatch_and_bad_thresholds() {
        let (t, f) = defaults();
        let a = gray(4, 4, |_, _| 0.0);
        let b = gray(4, 5, |_, _| 0.0);
        assert!(matches!(
            fusibility_maps(&a, &b, &t, &f),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = FusibilityThresholds {
            theta_cf: 0.0,
            ..FusibilityThresholds::default()
        };
        assert!(fusibility_maps(&a, &a, &bad, &f).is_err());
    }

    #[test]
    fn contour_floor_damps_tiny_contrasts() {
        // one code value against zero stays well inside the comfort zone
        let c = DEFAULT_CONTRAST_FLOOR;
        assert!((contour_ratio(c, 0.0, 0.8, c) - 1.0 / 1.8).abs() < 1e-15);
        assert_eq!(contour_ratio(0.0, 0.0, 0.8, c), 0.0);
        // large contrasts are barely affected
        let r = contour_ratio(100.0, 10.0, 0.8, c);
        assert!((r - 90.0 / 80.0).abs() < 0.01);
        let bad = FusibilityThresholds {
            contrast_floor: 0.0,
            ..FusibilityThresholds::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn phi_pointwise() {
        assert_eq!(phi(0.0), 0.0);
        assert_eq!(phi(1.0), 0.0);
        assert_eq!(phi(1.5), 0.5);
        assert_eq!(phi(3.0), 2.0);
    }

    proptest! {
        #[test]
        fn phi_monotone_nonnegative(a in 0.0..10.0f64, b in 0.0..10.0f64) {
            prop_assert!(phi(a) >= 0.0);
            if a <= b { prop_assert!(phi(a) <= phi(b)); }
            if a <= 1.0 { prop_assert_eq!(phi(a), 0.0); }
        }

        #[test]
        fn energy_symmetric_under_swap(
            va in proptest::collection::vec(0.0f64..1.0, 64),
            vb in proptest::collection::vec(0.0f64..1.0, 64),
        ) {
            let (t, f) = defaults();
            let a = gray(8, 8, |x, y| va[y * 8 + x]);
            let b = gray(8, 8, |x, y| vb[y * 8 + x]);
            let ab = fusibility_energy(&fusibility_maps(&a, &b, &t, &f).unwrap());
            let ba = fusibility_energy(&fusibility_maps(&b, &a, &t, &f).unwrap());
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn zero_energy_iff_all_ratios_within_one(
            va in proptest::collection::vec(0.0f64..1.0, 36),
            vb in proptest::collection::vec(0.0f64..1.0, 36),
        ) {
            let (t, f) = defaults();
            let a = gray(6, 6, |x, y| va[y * 6 + x]);
            let b = gray(6, 6, |x, y| vb[y * 6 + x]);
            let maps = fusibility_maps(&a, &b, &t, &f).unwrap();
            prop_assert_eq!(fusibility_energy(&maps) == 0.0, maps.infusible_pixels() == 0);
        }
    }
}
