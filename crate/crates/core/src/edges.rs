//! Canny edge detection on view luminance.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::raster::{LdrImage, Plane};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    /// Gaussian pre-smoothing sigma in pixels.
    pub sigma: f64,
    /// Weak threshold as a fraction of the maximum gradient magnitude.
    pub low_frac: f64,
    /// Strong threshold as a fraction of the maximum gradient magnitude.
    pub high_frac: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low_frac: 0.1,
            high_frac: 0.2,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "canny sigma {}",
                self.sigma
            )));
        }
        if !(0.0 < self.low_frac && self.low_frac < self.high_frac && self.high_frac <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "canny thresholds need 0 < low < high <= 1, got {} / {}",
                self.low_frac, self.high_frac
            )));
        }
        Ok(())
    }
}

/// Boolean edge map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl EdgeMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            mask: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} mask needs {} entries, got {}",
                width * height,
                mask.len()
            )));
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Row-major indices of the marked pixels.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
    }
}

/// Gradient stage output, exposed so callers can inspect magnitudes.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub gx: Plane,
    pub gy: Plane,
    pub magnitude: Plane,
}

pub fn canny(view: &LdrImage, params: &CannyParams) -> Result<EdgeMask> {
    params.validate()?;
    let grads = gradients(&view.luminance(), params.sigma);
    Ok(canny_from_gradients(&grads, params))
}

pub fn gradients(lum: &Plane, sigma: f64) -> Gradients {
    let smooth = gaussian_smooth(lum, sigma);
    let (w, h) = smooth.dims();
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        smooth.get(x, y)
    };
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let sx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let sy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            gx[i] = sx;
            gy[i] = sy;
            mag[i] = sx.hypot(sy);
        }
    }
    Gradients {
        gx: Plane::new(w, h, gx).expect("dims"),
        gy: Plane::new(w, h, gy).expect("dims"),
        magnitude: Plane::new(w, h, mag).expect("dims"),
    }
}

pub fn canny_from_gradients(grads: &Gradients, params: &CannyParams) -> EdgeMask {
    let (w, h) = grads.magnitude.dims();
    let mag = grads.magnitude.data();
    let max = mag.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return EdgeMask::empty(w, h);
    }
    let high = params.high_frac * max;
    let low = params.low_frac * max;

    let m = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // Non-maximum suppression along the gradient direction quantized to
    // 0/45/90/135 degrees. Ties keep the pixel on the negative side only, so
    // a symmetric ridge yields one pixel.
    let mut thin = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let v = mag[i];
            if v < low {
                continue;
            }
            let angle = grads.gy.data()[i]
                .atan2(grads.gx.data()[i])
                .to_degrees()
                .rem_euclid(180.0);
            let (dx, dy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let ahead = m(xi + dx, yi + dy);
            let behind = m(xi - dx, yi - dy);
            if v >= ahead && v > behind {
                thin[i] = v;
            }
        }
    }

    let mut mask = vec![false; w * h];
    let mut queue = VecDeque::new();
    for (i, &v) in thin.iter().enumerate() {
        if v >= high {
            mask[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !mask[j] && thin[j] >= low {
                    mask[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    EdgeMask {
        width: w,
        height: h,
        mask,
    }
}

/// Separable Gaussian with clamp-to-edge borders, accumulated as offsets from
/// the centre sample so that flat regions stay exactly flat.
fn gaussian_smooth(src: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return src.clone();
    }
    let r = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-r..=r)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let (w, h) = src.dims();
    let pass = |input: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let c = input[y * w + x];
                let mut acc = 0.0;
                for (k, kv) in kernel.iter().enumerate() {
                    let d = k as isize - r;
                    let v = if horizontal {
                        input[y * w + (x as isize + d).clamp(0, w as isize - 1) as usize]
                    } else {
                        input[(y as isize + d).clamp(0, h as isize - 1) as usize * w + x]
                    };
                    acc += kv * (v - c);
                }
                out[y * w + x] = c + acc / norm;
            }
        }
        out
    };
    let tmp = pass(src.data(), true);
    let out = pass(&tmp, false);
    Plane::new(w, h, out).expect("dims")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> LdrImage {
        LdrImage::from_fn(w, h, |x, y| [f(x, y); 3]).unwrap()
    }

    #[test]
    fn constant_gives_empty_mask() {
        let mask = canny(&gray(30, 20, |_, _| 0.6), &CannyParams::default()).unwrap();
        assert_eq!(mask.count(), 0);
    }

    #[test]
    fn vertical_step_gives_one_pixel_chain() {
        let (w, h) = (32, 24);
        let mask = canny(
            &gray(w, h, |x, _| if x < 16 { 0.1 } else { 0.9 }),
            &CannyParams::default(),
        )
        .unwrap();
        for y in 0..h {
            let cols: Vec<usize> = (0..w).filter(|&x| mask.get(x, y)).collect();
            assert_eq!(cols.len(), 1, "row {y}: {cols:?}");
            assert!(cols[0] == 15 || cols[0] == 16);
        }
        // single connected vertical chain
        let col = (0..w).find(|&x| mask.get(x, 0)).unwrap();
        assert!((0..h).all(|y| mask.get(col, y)));
    }

    #[test]
    fn marked_pixels_have_gradient_above_low_threshold() {
        let view = gray(40, 40, |x, y| {
            let d = ((x as f64 - 20.0).powi(2) + (y as f64 - 18.0).powi(2)).sqrt();
            if d < 11.0 {
                0.8
            } else {
                0.2 + 0.004 * x as f64
            }
        });
        let p = CannyParams::default();
        let grads = gradients(&view.luminance(), p.sigma);
        let mask = canny_from_gradients(&grads, &p);
        assert!(mask.count() > 0);
        let max = grads.magnitude.min_max().1;
        for i in mask.indices() {
            let g = grads.magnitude.data()[i];
            assert!(g > 0.0 && g >= p.low_frac * max);
        }
    }

    #[test]
    fn rejects_bad_thresholds() {
        let v = gray(4, 4, |_, _| 0.0);
        for (lo, hi) in [(0.0, 0.2), (0.3, 0.2), (0.1, 1.2)] {
            let p = CannyParams {
                low_frac: lo,
                high_frac: hi,
                ..CannyParams::default()
            };
            assert!(canny(&v, &p).is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn mask_invariant_under_power_of_two_scaling(
            vals in proptest::collection::vec(0.0f64..1.0, 16 * 12),
            k in 1i32..4,
        ) {
            let a = gray(16, 12, |x, y| vals[y * 16 + x]);
            let s = 2f64.powi(-k);
            let b = gray(16, 12, |x, y| vals[y * 16 + x] * s);
            let p = CannyParams::default();
            prop_assert_eq!(canny(&a, &p).unwrap(), canny(&b, &p).unwrap());
        }
    }
}
