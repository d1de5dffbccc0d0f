//! Two-stage finite-difference descent over `(beta_left, beta_right)`.
//!
//! Stage 1 minimizes `E_c + lambda2 * E_f` (no detail term) from the
//! configured start; stage 2 minimizes the full energy from the stage-1
//! optimum. Each iteration takes a central-difference gradient, projects it
//! onto the search box, and backtracks along the normalized descent direction
//! until the energy drops.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edges::{canny, CannyParams, EdgeMask};
use crate::energy::{EnergyBreakdown, EnergyConfig, ReferenceModel};
use crate::error::{Error, Result};
use crate::perception::ViewFeatures;
use crate::raster::{BinocularPair, HdrImage, LdrImage};
use crate::tonemap::{OperatorParams, References, ToneMapper, BETA_CONTRAST_REF, BETA_DETAIL_REF};

/// Feature maps kept per beta before the cache is flushed.
const FEATURE_CACHE_CAP: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub beta_bounds: (f64, f64),
    pub init: (f64, f64),
    /// Finite-difference half step, in beta units.
    pub fd_step: f64,
    /// First trial step length along the normalized descent direction.
    pub step_size: f64,
    pub max_halvings: u32,
    /// Stop when an accepted step lowers the energy by less than this, or the
    /// projected gradient norm falls below it.
    pub tol: f64,
    pub max_iters_stage1: usize,
    pub max_iters_stage2: usize,
    pub energy: EnergyConfig,
    pub operator: OperatorParams,
    pub canny: CannyParams,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            beta_bounds: (BETA_DETAIL_REF, BETA_CONTRAST_REF),
            init: (3.75, 3.75),
            fd_step: 0.05,
            step_size: 0.5,
            max_halvings: 8,
            tol: 1e-4,
            max_iters_stage1: 15,
            max_iters_stage2: 45,
            energy: EnergyConfig::default(),
            operator: OperatorParams::default(),
            canny: CannyParams::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.beta_bounds;
        if !(BETA_DETAIL_REF <= lo && lo < hi && hi <= BETA_CONTRAST_REF) {
            return Err(Error::InvalidParameter(format!(
                "beta bounds [{lo}, {hi}] must be an interval inside [{BETA_DETAIL_REF}, {BETA_CONTRAST_REF}]"
            )));
        }
        for b in [self.init.0, self.init.1] {
            if !(lo..=hi).contains(&b) {
                return Err(Error::InvalidParameter(format!(
                    "init beta {b} outside [{lo}, {hi}]"
                )));
            }
        }
        if !(self.fd_step > 0.0 && self.fd_step < hi - lo) {
            return Err(Error::InvalidParameter(format!(
                "fd_step {} must be in (0, {})",
                self.fd_step,
                hi - lo
            )));
        }
        if !(self.step_size > 0.0 && self.tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step_size {} must be > 0 and tol {} >= 0",
                self.step_size, self.tol
            )));
        }
        if self.max_iters_stage1 == 0 || self.max_iters_stage2 == 0 {
            return Err(Error::InvalidParameter(
                "iteration limits must be >= 1".into(),
            ));
        }
        self.operator.validate()?;
        self.canny.validate()?;
        self.energy.validate()
    }

    fn clamp(&self, b: f64) -> f64 {
        b.clamp(self.beta_bounds.0, self.beta_bounds.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Contrast and fusibility only.
    Contrast,
    Full,
}

impl Stage {
    fn objective(self, e: &EnergyBreakdown) -> f64 {
        match self {
            Stage::Contrast => e.e_c + e.lambda2 * e.e_f,
            Stage::Full => e.e_total,
        }
    }
}

/// One accepted point of the descent. Iteration 0 of each stage is its
/// starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub stage: Stage,
    pub iteration: usize,
    pub beta_left: f64,
    pub beta_right: f64,
    /// Value of the stage objective.
    pub objective: f64,
    /// Full breakdown at this point.
    pub energy: EnergyBreakdown,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_pair: BinocularPair,
    pub best_params: (f64, f64),
    pub best_energy: EnergyBreakdown,
    pub trajectory: Vec<TrajectoryStep>,
    pub stage1_iterations: usize,
    pub stage2_iterations: usize,
    pub iterations_used: usize,
    pub wall_time_per_iteration: f64,
    /// Stage 2 stopped on its tolerance rather than its iteration limit.
    pub converged: bool,
    /// Distinct `(beta_left, beta_right)` energy evaluations.
    pub evaluations: usize,
}

/// Everything fixed for one HDR input: the decomposition, both references,
/// the detail-reference edges and the reference side of the energy.
pub struct Problem {
    mapper: ToneMapper,
    references: References,
    edges: EdgeMask,
    model: ReferenceModel,
    features: Mutex<HashMap<u64, Arc<ViewFeatures>>>,
    energies: Mutex<HashMap<(u64, u64), EnergyBreakdown>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("dims", &self.model.dims())
            .field("model", &self.model)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        img: &HdrImage,
        operator: &OperatorParams,
        canny_params: &CannyParams,
        energy: EnergyConfig,
    ) -> Result<Self> {
        let mapper = ToneMapper::new(img, operator)?;
        let references = References {
            contrast: mapper.apply(BETA_CONTRAST_REF)?,
            detail: mapper.apply(BETA_DETAIL_REF)?,
        };
        let edges = canny(&references.detail, canny_params)?;
        let model =
            ReferenceModel::from_images(&references.contrast, &references.detail, &edges, energy)?;
        Ok(Self {
            mapper,
            references,
            edges,
            model,
            features: Mutex::new(HashMap::new()),
            energies: Mutex::new(HashMap::new()),
        })
    }

    pub fn from_config(img: &HdrImage, config: &OptimizerConfig) -> Result<Self> {
        config.validate()?;
        Self::new(img, &config.operator, &config.canny, config.energy)
    }

    pub fn mapper(&self) -> &ToneMapper {
        &self.mapper
    }

    pub fn references(&self) -> &References {
        &self.references
    }

    pub fn edges(&self) -> &EdgeMask {
        &self.edges
    }

    pub fn model(&self) -> &ReferenceModel {
        &self.model
    }

    pub fn render(&self, beta: f64) -> Result<LdrImage> {
        self.mapper.apply(beta)
    }

    pub fn features(&self, beta: f64) -> Result<Arc<ViewFeatures>> {
        if let Some(f) = self
            .features
            .lock()
            .expect("cache lock")
            .get(&beta.to_bits())
        {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(ViewFeatures::compute(
            &self.render(beta)?,
            &self.model.config().fusion,
        ));
        let mut cache = self.features.lock().expect("cache lock");
        if cache.len() >= FEATURE_CACHE_CAP {
            cache.clear();
        }
        cache.insert(beta.to_bits(), Arc::clone(&f));
        Ok(f)
    }

    /// Full energy breakdown of the pair tone mapped at the two betas.
    pub fn evaluate(&self, beta_left: f64, beta_right: f64) -> Result<EnergyBreakdown> {
        let key = (beta_left.to_bits(), beta_right.to_bits());
        if let Some(e) = self.energies.lock().expect("cache lock").get(&key) {
            return Ok(*e);
        }
        let left = self.features(beta_left)?;
        let right = self.features(beta_right)?;
        let e = self.model.evaluate(&left, &right)?;
        check_finite(&e, beta_left, beta_right)?;
        self.energies.lock().expect("cache lock").insert(key, e);
        Ok(e)
    }

    /// Energy of the monocular baseline: both eyes see the image tone mapped
    /// at the midpoint beta.
    pub fn evaluate_monocular(&self, beta_left: f64, beta_right: f64) -> Result<EnergyBreakdown> {
        let mid = 0.5 * (beta_left + beta_right);
        self.evaluate(mid, mid)
    }

    pub fn evaluations(&self) -> usize {
        self.energies.lock().expect("cache lock").len()
    }
}

fn check_finite(e: &EnergyBreakdown, beta_left: f64, beta_right: f64) -> Result<()> {
    for (name, v) in [
        ("e_c", e.e_c),
        ("e_d", e.e_d),
        ("e_f", e.e_f),
        ("e_total", e.e_total),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFiniteEnergy {
                beta_left,
                beta_right,
                detail: format!("{name} = {v}"),
            });
        }
    }
    Ok(())
}

pub fn optimize(img: &HdrImage, config: &OptimizerConfig) -> Result<OptimizationResult> {
    let problem = Problem::from_config(img, config)?;
    optimize_problem(&problem, config)
}

pub fn optimize_problem(problem: &Problem, config: &OptimizerConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let start = Instant::now();
    let mut trajectory = Vec::new();

    let init = (config.clamp(config.init.0), config.clamp(config.init.1));
    let (x1, n1, _) = descend(
        problem,
        config,
        Stage::Contrast,
        init,
        config.max_iters_stage1,
        &mut trajectory,
    )?;
    let (x2, n2, converged) = descend(
        problem,
        config,
        Stage::Full,
        x1,
        config.max_iters_stage2,
        &mut trajectory,
    )?;

    // Stage 1 optimizes a different objective, so the stage-2 start can sit
    // above the initial point under the full energy.
    let e_init = problem.evaluate(init.0, init.1)?;
    let e_final = problem.evaluate(x2.0, x2.1)?;
    let (best, best_energy) = if e_init.e_total < e_final.e_total {
        log::warn!(
            "descent ended above its start ({} > {}); returning the start",
            e_final.e_total,
            e_init.e_total
        );
        (init, e_init)
    } else {
        (x2, e_final)
    };

    let iterations_used = n1 + n2;
    let elapsed = start.elapsed().as_secs_f64();
    let best_pair = BinocularPair::new(
        problem.render(best.0)?,
        problem.render(best.1)?,
        best.0,
        best.1,
    )?;
    Ok(OptimizationResult {
        best_pair,
        best_params: best,
        best_energy,
        trajectory,
        stage1_iterations: n1,
        stage2_iterations: n2,
        iterations_used,
        wall_time_per_iteration: elapsed / iterations_used.max(1) as f64,
        converged,
        evaluations: problem.evaluations(),
    })
}

/// Runs one stage; returns the final point, iterations spent and whether the
/// stage met its tolerance.
fn descend(
    problem: &Problem,
    config: &OptimizerConfig,
    stage: Stage,
    start: (f64, f64),
    max_iters: usize,
    trajectory: &mut Vec<TrajectoryStep>,
) -> Result<((f64, f64), usize, bool)> {
    let objective =
        |bl: f64, br: f64| -> Result<f64> { Ok(stage.objective(&problem.evaluate(bl, br)?)) };
    let mut x = start;
    let mut e = problem.evaluate(x.0, x.1)?;
    let mut f = stage.objective(&e);
    trajectory.push(step_record(stage, 0, x, f, &e));

    for iter in 1..=max_iters {
        let g = projected_gradient(config, x, &objective)?;
        let norm = g.0.hypot(g.1);
        log::debug!(
            "{stage:?} iter {iter}: beta=({:.4}, {:.4}) f={f:.6} |g|={norm:.3e}",
            x.0,
            x.1
        );
        if norm < config.tol {
            return Ok((x, iter - 1, true));
        }
        let dir = (-g.0 / norm, -g.1 / norm);
        let mut step = config.step_size;
        let mut accepted = None;
        for _ in 0..=config.max_halvings {
            let cand = (
                config.clamp(x.0 + step * dir.0),
                config.clamp(x.1 + step * dir.1),
            );
            if cand != x {
                let fc = objective(cand.0, cand.1)?;
                if fc < f {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            // no decrease down to the smallest trial step
            return Ok((x, iter, true));
        };
        let gain = f - fc;
        x = cand;
        f = fc;
        e = problem.evaluate(x.0, x.1)?;
        trajectory.push(step_record(stage, iter, x, f, &e));
        if gain < config.tol {
            return Ok((x, iter, true));
        }
    }
    Ok((x, max_iters, false))
}

fn step_record(
    stage: Stage,
    iteration: usize,
    x: (f64, f64),
    objective: f64,
    e: &EnergyBreakdown,
) -> TrajectoryStep {
    TrajectoryStep {
        stage,
        iteration,
        beta_left: x.0,
        beta_right: x.1,
        objective,
        energy: *e,
    }
}

/// Central differences with probes clamped to the box (one-sided at a bound),
/// then components that would push out of the box are zeroed.
fn projected_gradient(
    config: &OptimizerConfig,
    x: (f64, f64),
    objective: &(dyn Fn(f64, f64) -> Result<f64> + Sync),
) -> Result<(f64, f64)> {
    let h = config.fd_step;
    let (l0, l1) = (config.clamp(x.0 - h), config.clamp(x.0 + h));
    let (r0, r1) = (config.clamp(x.1 - h), config.clamp(x.1 + h));
    let probes = [(l0, x.1), (l1, x.1), (x.0, r0), (x.0, r1)];
    let values = probes
        .par_iter()
        .map(|&(a, b)| objective(a, b))
        .collect::<Result<Vec<f64>>>()?;
    let mut g = (
        (values[1] - values[0]) / (l1 - l0),
        (values[3] - values[2]) / (r1 - r0),
    );
    let (lo, hi) = config.beta_bounds;
    let blocked = |b: f64, d: f64| (b <= lo && d > 0.0) || (b >= hi && d < 0.0);
    if blocked(x.0, g.0) {
        g.0 = 0.0;
    }
    if blocked(x.1, g.1) {
        g.1 = 0.0;
    }
    Ok(g)
}

/// Puts the lower-beta (more detailed) view on the left; equal betas keep
/// their order.
pub fn order_views(pair: BinocularPair) -> BinocularPair {
    if pair.beta_left > pair.beta_right {
        pair.swapped()
    } else {
        pair
    }
}
