//! Seeded procedural HDR scenes for tests and benchmarks.
//!
//! A scene is built in log10 luminance: a sky with cloud texture above a
//! wavy horizon, a small sun, a textured ground with cast shadows, and a few
//! boxy structures with lit windows. Luminance spans roughly 1e-2 to 2e4,
//! which gives the tone mapper several decades to compress.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::raster::HdrImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl SceneSpec {
    pub fn new(width: usize, height: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            seed,
        }
    }
}

/// Smooth lattice noise in `[0, 1]`.
struct ValueNoise {
    size: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, size: usize) -> Self {
        let lattice = (0..size * size).map(|_| rng.gen::<f64>()).collect();
        Self { size, lattice }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let n = self.size as isize;
        let (xf, yf) = (x.floor(), y.floor());
        let (tx, ty) = (smooth(x - xf), smooth(y - yf));
        let (xi, yi) = (xf as isize, yf as isize);
        let v = |i: isize, j: isize| self.lattice[(j.rem_euclid(n) * n + i.rem_euclid(n)) as usize];
        let a = v(xi, yi) + tx * (v(xi + 1, yi) - v(xi, yi));
        let b = v(xi, yi + 1) + tx * (v(xi + 1, yi + 1) - v(xi, yi + 1));
        a + ty * (b - a)
    }

    /// Fractal sum, centred on zero, roughly in `[-0.5, 0.5]`.
    fn fbm(&self, x: f64, y: f64, octaves: u32) -> f64 {
        let (mut sum, mut amp, mut freq, mut norm) = (0.0, 1.0, 1.0, 0.0);
        for k in 0..octaves {
            // shift each octave so lattice points do not line up
            let off = 17.3 * k as f64;
            sum += amp * (self.at(x * freq + off, y * freq - off) - 0.5);
            norm += amp;
            amp *= 0.5;
            freq *= 2.0;
        }
        sum / norm
    }
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

struct Structure {
    x0: f64,
    x1: f64,
    top: f64,
    level: f64,
    tint: [f64; 3],
    windows: bool,
}

pub fn generate(spec: SceneSpec) -> Result<HdrImage> {
    let SceneSpec {
        width,
        height,
        seed,
    } = spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = ValueNoise::new(&mut rng, 64);
    let detail = ValueNoise::new(&mut rng, 64);
    let (w, h) = (width as f64, height as f64);
    let scale = w.min(h);

    let horizon_base = rng.gen_range(0.30..0.50);
    let horizon_amp = rng.gen_range(0.03..0.10);
    let sky_level = rng.gen_range(2.6..3.3);
    let ground_level = rng.gen_range(0.4..1.2);
    let sun = (
        rng.gen_range(0.1..0.9) * w,
        rng.gen_range(0.05..0.6) * horizon_base * h,
        rng.gen_range(0.012..0.025) * scale,
    );
    let sun_level = rng.gen_range(4.0..4.4);
    let light = (rng.gen_range(-1.0..1.0f64), rng.gen_range(0.3..1.0f64));

    let structures: Vec<Structure> = (0..rng.gen_range(2..5))
        .map(|_| {
            let cx = rng.gen_range(0.05..0.95) * w;
            let half = rng.gen_range(0.05..0.15) * w;
            Structure {
                x0: cx - half,
                x1: cx + half,
                top: rng.gen_range(0.15..0.45) * h,
                level: rng.gen_range(-0.8..1.0),
                tint: [rng.gen_range(0.8..1.2), 1.0, rng.gen_range(0.7..1.1)],
                windows: rng.gen_bool(0.7),
            }
        })
        .collect();
    let window_pitch = (rng.gen_range(0.035..0.06) * scale).max(3.0);

    HdrImage::from_fn(width, height, |px, py| {
        let (x, y) = (px as f64 + 0.5, py as f64 + 0.5);
        let (u, v) = (x / scale, y / scale);
        let horizon = h * (horizon_base + horizon_amp * 2.0 * noise.fbm(u * 1.5, 3.7, 3));

        let (mut log_l, mut tint) = if y < horizon {
            let t = y / horizon;
            let cloud = noise.fbm(u * 3.0, v * 6.0, 5);
            (sky_level - 0.5 * t + 0.9 * cloud.max(0.0), [0.75, 0.9, 1.3])
        } else {
            let tex = noise.fbm(u * 4.0 + 9.0, v * 4.0, 4) * 0.9
                + detail.fbm(u * 22.0, v * 22.0, 3) * 0.5;
            let depth = (y - horizon) / (h - horizon).max(1.0);
            let shade = noise.fbm(u * 2.0 + light.0 * v, v * 2.0 * light.1, 3);
            let shadow = if shade > 0.08 { -1.4 } else { 0.0 };
            (ground_level + 0.4 * depth + tex + shadow, [1.1, 1.0, 0.75])
        };

        for s in &structures {
            if x >= s.x0 && x < s.x1 && y >= s.top {
                let facade = detail.fbm(u * 30.0, v * 30.0, 2) * 0.4;
                log_l = s.level + facade;
                tint = s.tint;
                if s.windows {
                    let (gx, gy) = ((x - s.x0) / window_pitch, (y - s.top) / window_pitch);
                    let (fx, fy) = (gx.fract(), gy.fract());
                    let lit = detail.at(gx.floor() * 3.1, gy.floor() * 5.3 + s.x0) > 0.55;
                    if (0.25..0.75).contains(&fx) && (0.2..0.7).contains(&fy) {
                        log_l = if lit { 2.6 + facade } else { -1.6 + facade };
                        if lit {
                            tint = [1.2, 1.0, 0.6];
                        }
                    }
                }
                break;
            }
        }

        let d = ((x - sun.0).powi(2) + (y - sun.1).powi(2)).sqrt();
        let mut lum = 10f64.powf(log_l);
        if d < sun.2 {
            lum = 10f64.powf(sun_level);
            tint = [1.05, 1.0, 0.9];
        } else if y < horizon {
            lum += 10f64.powf(sun_level - 1.3) * (-(d - sun.2) / (3.0 * sun.2)).exp();
        }
        let norm = crate::raster::rgb_luminance(tint);
        [
            lum * tint[0] / norm,
            lum * tint[1] / norm,
            lum * tint[2] / norm,
        ]
    })
}

/// `count` scenes with consecutive seeds starting at `first_seed`.
pub fn corpus(width: usize, height: usize, first_seed: u64, count: usize) -> Result<Vec<HdrImage>> {
    (0..count as u64)
        .map(|k| generate(SceneSpec::new(width, height, first_seed + k)))
        .collect()
}
