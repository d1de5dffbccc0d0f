//! Binocular brightness and contrast fusion.
//!
//! Brightness of a view is the mean luminance over a disc-shaped fusion area;
//! contour contrast is the max-minus-min luminance over a 3x3 window, in
//! percent. The two views combine through vector summation (brightness) and a
//! nonlinear power sum (contrast).

use rayon::prelude::*;

use crate::raster::{BrightnessMap, ContrastMap, LdrImage, Plane};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    /// Brightness-fusion phase angle in degrees.
    pub alpha: f64,
    /// Radius of the fusion disc in pixels.
    pub fusion_radius: f64,
    pub s: f64,
    pub t: f64,
    pub z: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            alpha: 120.0,
            fusion_radius: 16.0,
            s: 3.47,
            t: 3.03,
            z: 4.76,
        }
    }
}

/// Cosine of an angle in degrees, exact at multiples of 60 and 90 degrees.
pub fn cos_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    match r {
        0.0 => 1.0,
        r if r == 60.0 || r == 300.0 => 0.5,
        r if r == 90.0 || r == 270.0 => 0.0,
        r if r == 120.0 || r == 240.0 => -0.5,
        180.0 => -1.0,
        _ => r.to_radians().cos(),
    }
}

/// Fused binocular brightness, `sqrt(bL^2 + bR^2 + 2 bL bR cos(alpha))`.
#[inline]
pub fn fuse_brightness(left: f64, right: f64, alpha: f64) -> f64 {
    fuse_brightness_cos(left, right, cos_degrees(alpha))
}

#[inline]
pub fn fuse_brightness_cos(left: f64, right: f64, cos_alpha: f64) -> f64 {
    let sq = left * left + right * right + 2.0 * left * right * cos_alpha;
    let fused = sq.max(0.0).sqrt();
    if cos_alpha == -0.5 {
        // at 120 degrees the fused value lies between the two inputs
        fused.clamp(left.min(right), left.max(right))
    } else {
        fused
    }
}

/// Fused binocular contrast, `(cL^s + cR^t)^(s/t) / (z + cL^s + cR^t)`.
///
/// The left view takes exponent `s` and the right `t`, so the model is not
/// symmetric under view swap.
#[inline]
pub fn fuse_contrast(left: f64, right: f64, params: &FusionParams) -> f64 {
    let sum = left.powf(params.s) + right.powf(params.t);
    if sum == 0.0 {
        return 0.0;
    }
    sum.powf(params.s / params.t) / (params.z + sum)
}

/// Mean luminance over the disc `dx^2 + dy^2 <= r^2`, clipped to the image.
pub fn local_brightness(view: &LdrImage, fusion_radius: f64) -> BrightnessMap {
    disc_mean(&view.luminance(), fusion_radius)
}

/// Disc mean of an arbitrary plane. Sums run row by row, left to right.
pub fn disc_mean(src: &Plane, radius: f64) -> Plane {
    let (w, h) = src.dims();
    let r = radius.max(0.0).floor() as isize;
    let r2 = radius * radius;
    // half-width of the disc on each row offset
    let spans: Vec<(isize, isize)> = (-r..=r)
        .map(|dy| {
            let mut half = 0;
            while (((half + 1) * (half + 1) + dy * dy) as f64) <= r2 {
                half += 1;
            }
            (dy, half)
        })
        .collect();
    let data = src.data();
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, dst) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut count = 0usize;
            for &(dy, half) in &spans {
                let qy = y as isize + dy;
                if qy < 0 || qy >= h as isize {
                    continue;
                }
                let x0 = (x as isize - half).max(0) as usize;
                let x1 = (x as isize + half).min(w as isize - 1) as usize;
                let base = qy as usize * w;
                for &v in &data[base + x0..=base + x1] {
                    acc += v;
                }
                count += x1 - x0 + 1;
            }
            *dst = acc / count as f64;
        }
    });
    Plane::new(w, h, out).expect("same dims")
}

/// Local contour contrast: `100 * (max - min)` of luminance over the 3x3
/// neighbourhood, clipped at the borders.
pub fn contour_contrast(view: &LdrImage) -> ContrastMap {
    contour_contrast_of(&view.luminance())
}

pub fn contour_contrast_of(lum: &Plane) -> Plane {
    let (w, h) = lum.dims();
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let y0 = y.saturating_sub(1);
        let y1 = (y + 1).min(h - 1);
        for (x, dst) in row.iter_mut().enumerate() {
            let x0 = x.saturating_sub(1);
            let x1 = (x + 1).min(w - 1);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for qy in y0..=y1 {
                for &v in &lum.row(qy)[x0..=x1] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            *dst = 100.0 * (hi - lo);
        }
    });
    Plane::new(w, h, out).expect("same dims")
}

/// The per-view statistics every energy term consumes.
#[derive(Debug, Clone)]
pub struct ViewFeatures {
    pub brightness: BrightnessMap,
    pub contrast: ContrastMap,
}

impl ViewFeatures {
    pub fn compute(view: &LdrImage, params: &FusionParams) -> Self {
        let lum = view.luminance();
        Self {
            brightness: disc_mean(&lum, params.fusion_radius),
            contrast: contour_contrast_of(&lum),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.brightness.dims()
    }
}
