//! Edge-preserving smoothing of log-luminance.
//!
//! [`bilateral_exact`] is the brute-force filter: Gaussian spatial weights
//! truncated at 3 sigma, Gaussian range weights, normalized per pixel over the
//! in-bounds neighbourhood. [`bilateral_fast`] approximates it with
//! piecewise-linear intensity layers: the image is splatted onto a coarse grid
//! once per intensity level, each layer is blurred with an ordinary Gaussian,
//! and every pixel interpolates between the two layers that bracket its own
//! value.

use rayon::prelude::*;

use crate::raster::Plane;

/// Brute-force bilateral filter.
///
/// Weighted means are accumulated as offsets from the centre value, so a flat
/// neighbourhood returns its input bit-for-bit.
pub fn bilateral_exact(input: &Plane, sigma_space: f64, sigma_range: f64) -> Plane {
    let (w, h) = input.dims();
    let radius = (3.0 * sigma_space).ceil().max(0.0) as isize;
    let side = (2 * radius + 1) as usize;
    let inv_2ss = 1.0 / (2.0 * sigma_space * sigma_space);
    let spatial: Vec<f64> = (0..side * side)
        .map(|i| {
            let dx = (i % side) as isize - radius;
            let dy = (i / side) as isize - radius;
            (-((dx * dx + dy * dy) as f64) * inv_2ss).exp()
        })
        .collect();
    let inv_2rr = if sigma_range.is_finite() {
        1.0 / (2.0 * sigma_range * sigma_range)
    } else {
        0.0
    };
    let src = input.data();
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let y0 = (y as isize - radius).max(0);
        let y1 = (y as isize + radius).min(h as isize - 1);
        for (x, dst) in row.iter_mut().enumerate() {
            let x0 = (x as isize - radius).max(0);
            let x1 = (x as isize + radius).min(w as isize - 1);
            let center = src[y * w + x];
            let mut wsum = 0.0;
            let mut dsum = 0.0;
            for qy in y0..=y1 {
                let krow = ((qy - y as isize + radius) as usize) * side;
                let srow = qy as usize * w;
                for qx in x0..=x1 {
                    let d = src[srow + qx as usize] - center;
                    let wt = spatial[krow + (qx - x as isize + radius) as usize]
                        * (-d * d * inv_2rr).exp();
                    wsum += wt;
                    dsum += wt * d;
                }
            }
            *dst = center + dsum / wsum;
        }
    });
    Plane::new(w, h, out).expect("dimensions preserved")
}

/// Knobs of the layered approximation. `None` selects the defaults:
/// downsampling by `sigma_space / 3` and four layers per `sigma_range`.
/// Coarser layers smear strong edges: one layer per `sigma_range` leaves
/// errors above 0.1 (log10) next to light sources.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FastBilateralConfig {
    pub downsample: Option<f64>,
    pub range_spacing: Option<f64>,
}

pub fn bilateral_fast(input: &Plane, sigma_space: f64, sigma_range: f64) -> Plane {
    bilateral_fast_with(
        input,
        sigma_space,
        sigma_range,
        &FastBilateralConfig::default(),
    )
}

pub fn bilateral_fast_with(
    input: &Plane,
    sigma_space: f64,
    sigma_range: f64,
    config: &FastBilateralConfig,
) -> Plane {
    let (w, h) = input.dims();
    let (lo, hi) = input.min_max();
    if hi <= lo {
        return input.clone();
    }
    let ds = config.downsample.unwrap_or(sigma_space / 3.0).max(1.0);
    let spacing = config.range_spacing.unwrap_or(sigma_range / 4.0);
    let n_layers = ((hi - lo) / spacing).floor() as usize + 2;
    let gw = ((w as f64 / ds).ceil() as usize).max(1);
    let gh = ((h as f64 / ds).ceil() as usize).max(1);
    let grid_sigma = sigma_space / ds;
    let kernel = gaussian_kernel(grid_sigma);
    let inv_2rr = 1.0 / (2.0 * sigma_range * sigma_range);
    // contributions beyond 8 sigma are below e^-32; every bracketing pixel
    // lies within one spacing of its layers
    let cutoff = (8.0 * sigma_range).max(2.0 * spacing);

    let src = input.data();
    let cell_x: Vec<usize> = (0..w)
        .map(|x| ((x as f64 / ds) as usize).min(gw - 1))
        .collect();
    let cell_y: Vec<usize> = (0..h)
        .map(|y| ((y as f64 / ds) as usize).min(gh - 1))
        .collect();
    let lerp_x: Vec<(usize, usize, f64)> = (0..w).map(|x| lerp_coord(x, ds, gw)).collect();
    let lerp_y: Vec<(usize, usize, f64)> = (0..h).map(|y| lerp_coord(y, ds, gh)).collect();

    // Lower bracketing layer and interpolation weight of the upper one.
    let bracket: Vec<(usize, f64)> = src
        .iter()
        .map(|&v| {
            let t = (v - lo) / spacing;
            let k = (t.floor() as usize).min(n_layers - 2);
            (k, t - k as f64)
        })
        .collect();

    let mut out = vec![0.0; w * h];
    let mut weight = vec![0.0; gw * gh];
    let mut offset = vec![0.0; gw * gh];
    let mut scratch = vec![0.0; gw * gh];
    for layer in 0..n_layers {
        let level = lo + layer as f64 * spacing;
        weight.iter_mut().for_each(|v| *v = 0.0);
        offset.iter_mut().for_each(|v| *v = 0.0);
        let mut any = false;
        for y in 0..h {
            let gy = cell_y[y] * gw;
            for x in 0..w {
                let d = src[y * w + x] - level;
                if d.abs() > cutoff {
                    continue;
                }
                let g = (-d * d * inv_2rr).exp();
                let cell = gy + cell_x[x];
                weight[cell] += g;
                offset[cell] += g * d;
                any = true;
            }
        }
        if !any {
            continue;
        }
        blur_separable(&mut weight, gw, gh, &kernel, &mut scratch);
        blur_separable(&mut offset, gw, gh, &kernel, &mut scratch);

        out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            let (y0, y1, fy) = lerp_y[y];
            for (x, dst) in row.iter_mut().enumerate() {
                let (k, frac) = bracket[y * w + x];
                let share = if k == layer {
                    1.0 - frac
                } else if k + 1 == layer {
                    frac
                } else {
                    continue;
                };
                let (x0, x1, fx) = lerp_x[x];
                let sample = |grid: &[f64]| {
                    let top = grid[y0 * gw + x0] * (1.0 - fx) + grid[y0 * gw + x1] * fx;
                    let bottom = grid[y1 * gw + x0] * (1.0 - fx) + grid[y1 * gw + x1] * fx;
                    top * (1.0 - fy) + bottom * fy
                };
                let wsum = sample(&weight);
                let value = if wsum > 1e-300 {
                    level + sample(&offset) / wsum
                } else {
                    src[y * w + x]
                };
                *dst += share * value;
            }
        });
    }
    Plane::new(w, h, out).expect("dimensions preserved")
}

/// Grid cells bracketing pixel `i` and the weight of the upper cell.
fn lerp_coord(i: usize, ds: f64, n: usize) -> (usize, usize, f64) {
    let u = ((i as f64 + 0.5) / ds - 0.5).clamp(0.0, (n - 1) as f64);
    let i0 = u.floor() as usize;
    let i1 = (i0 + 1).min(n - 1);
    (i0, i1, u - i0 as f64)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil().max(1.0) as isize;
    (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect()
}

/// Zero-padded separable convolution. Both the weight and the weighted-offset
/// grids go through the same kernel, so the padding cancels in their ratio.
fn blur_separable(grid: &mut [f64], w: usize, h: usize, kernel: &[f64], scratch: &mut [f64]) {
    let r = (kernel.len() / 2) as isize;
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let sx = x as isize + k as isize - r;
                if sx >= 0 && (sx as usize) < w {
                    acc += kv * grid[y * w + sx as usize];
                }
            }
            scratch[y * w + x] = acc;
        }
    }
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let sy = y as isize + k as isize - r;
                if sy >= 0 && (sy as usize) < h {
                    acc += kv * scratch[sy as usize * w + x];
                }
            }
            grid[y * w + x] = acc;
        }
    }
}

/// Peak signal-to-noise ratio of `test` against `reference`, using the
/// reference's dynamic range as the peak. Identical planes give infinity.
pub fn psnr(reference: &Plane, test: &Plane) -> f64 {
    assert_eq!(reference.dims(), test.dims());
    let (lo, hi) = reference.min_max();
    let mse = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * ((hi - lo).powi(2) / mse).log10()
}

pub fn max_abs_diff(a: &Plane, b: &Plane) -> f64 {
    assert_eq!(a.dims(), b.dims());
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_fixed_point() {
        let p = Plane::filled(17, 9, 0.731);
        assert_eq!(bilateral_exact(&p, 2.0, 0.4), p);
        assert_eq!(bilateral_fast(&p, 2.0, 0.4), p);
    }

    #[test]
    fn step_edge_survives_exact_filter() {
        let sigma_space = 3.0;
        let sigma_range = 0.1;
        let step = 10.0 * sigma_range;
        let p = Plane::from_fn(64, 64, |x, _| if x < 32 { 0.0 } else { step });
        let out = bilateral_exact(&p, sigma_space, sigma_range);
        for y in 0..64 {
            for x in 0..64 {
                let dist = if x < 32 { 31 - x } else { x - 32 } as f64;
                if dist + 0.5 >= 3.0 * sigma_space {
                    assert!((out.get(x, y) - p.get(x, y)).abs() < 0.01 * step);
                }
            }
        }
        // right at the edge the range kernel still keeps the two sides apart
        assert!((out.get(31, 32) - 0.0).abs() < 0.01 * step);
        assert!((out.get(32, 32) - step).abs() < 0.01 * step);
    }

    #[test]
    fn infinite_range_is_gaussian_blur() {
        let (w, h) = (21, 15);
        let sigma = 1.7;
        let p = Plane::from_fn(w, h, |x, y| if (x, y) == (9, 7) { 1.0 } else { 0.0 });
        let out = bilateral_exact(&p, sigma, f64::INFINITY);
        // oracle: truncated Gaussian, renormalized over in-bounds taps
        let r = (3.0 * sigma).ceil() as isize;
        for y in 0..h as isize {
            for x in 0..w as isize {
                let (mut num, mut den) = (0.0, 0.0);
                for qy in (y - r).max(0)..=(y + r).min(h as isize - 1) {
                    for qx in (x - r).max(0)..=(x + r).min(w as isize - 1) {
                        let d2 = ((qx - x).pow(2) + (qy - y).pow(2)) as f64;
                        let g = (-d2 / (2.0 * sigma * sigma)).exp();
                        den += g;
                        num += g * p.get(qx as usize, qy as usize);
                    }
                }
                assert!((out.get(x as usize, y as usize) - num / den).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_tracks_exact_on_smooth_ramp_with_edge() {
        let p = Plane::from_fn(80, 60, |x, y| {
            let ramp = 0.02 * x as f64 + 0.01 * y as f64;
            if x > 40 {
                ramp + 2.0
            } else {
                ramp
            }
        });
        let exact = bilateral_exact(&p, 2.4, 0.4);
        let fast = bilateral_fast(&p, 2.4, 0.4);
        assert!(
            max_abs_diff(&exact, &fast) < 0.05,
            "{}",
            max_abs_diff(&exact, &fast)
        );
        assert!(psnr(&exact, &fast) > 40.0);
    }

    #[test]
    fn psnr_of_identical_is_infinite() {
        let p = Plane::from_fn(4, 4, |x, y| (x * y) as f64);
        assert!(psnr(&p, &p).is_infinite());
    }
}
