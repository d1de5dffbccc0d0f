use clap::Args;

use binotone::edges::CannyParams;
use binotone::energy::{EnergyConfig, EnergyWeights};
use binotone::fusibility::{FusibilityThresholds, DEFAULT_CONTRAST_FLOOR};
use binotone::optimizer::OptimizerConfig;
use binotone::perception::FusionParams;
use binotone::tonemap::{OperatorParams, BETA_CONTRAST_REF, BETA_DETAIL_REF};

/// Model and solver knobs shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Args)]
pub struct Settings {
    /// Weight of the detail-preservation term.
    #[arg(long, default_value_t = EnergyWeights::default().lambda1)]
    pub lambda1: f64,
    /// Weight of the fusibility term.
    #[arg(long, default_value_t = EnergyWeights::default().lambda2)]
    pub lambda2: f64,
    /// Radius of the binocular fusion area, in pixels.
    #[arg(long, default_value_t = FusionParams::default().fusion_radius)]
    pub fusion_radius: f64,
    /// Brightness-fusion phase angle, in degrees.
    #[arg(long, default_value_t = FusionParams::default().alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = BETA_DETAIL_REF)]
    pub beta_min: f64,
    #[arg(long, default_value_t = BETA_CONTRAST_REF)]
    pub beta_max: f64,
    #[arg(long, default_value_t = FusibilityThresholds::default().theta_cf)]
    pub theta_cf: f64,
    #[arg(long, default_value_t = FusibilityThresholds::default().theta_rf)]
    pub theta_rf: f64,
    /// Contour-ratio denominator guard, in contrast percent.
    #[arg(long, default_value_t = DEFAULT_CONTRAST_FLOOR)]
    pub contrast_floor: f64,
    /// Smallest detail-over-contrast reference contrast gain (percent) for an
    /// edge pixel to count in the detail term.
    #[arg(long, default_value_t = EnergyConfig::default().detail_contrast_floor)]
    pub detail_contrast_floor: f64,
    #[arg(long, default_value_t = CannyParams::default().sigma)]
    pub canny_sigma: f64,
    #[arg(long, default_value_t = CannyParams::default().low_frac)]
    pub canny_low: f64,
    #[arg(long, default_value_t = CannyParams::default().high_frac)]
    pub canny_high: f64,
    /// Use the brute-force bilateral filter instead of the grid approximation.
    #[arg(long)]
    pub exact_bilateral: bool,
}

impl Default for Settings {
    fn default() -> Self {
        let energy = EnergyConfig::default();
        let canny = CannyParams::default();
        Self {
            lambda1: energy.weights.lambda1,
            lambda2: energy.weights.lambda2,
            fusion_radius: energy.fusion.fusion_radius,
            alpha: energy.fusion.alpha,
            beta_min: BETA_DETAIL_REF,
            beta_max: BETA_CONTRAST_REF,
            theta_cf: energy.thresholds.theta_cf,
            theta_rf: energy.thresholds.theta_rf,
            contrast_floor: energy.thresholds.contrast_floor,
            detail_contrast_floor: energy.detail_contrast_floor,
            canny_sigma: canny.sigma,
            canny_low: canny.low_frac,
            canny_high: canny.high_frac,
            exact_bilateral: false,
        }
    }
}

impl Settings {
    pub fn operator(&self) -> OperatorParams {
        OperatorParams {
            exact_bilateral: self.exact_bilateral,
            ..OperatorParams::default()
        }
    }

    pub fn canny(&self) -> CannyParams {
        CannyParams {
            sigma: self.canny_sigma,
            low_frac: self.canny_low,
            high_frac: self.canny_high,
        }
    }

    pub fn energy(&self) -> EnergyConfig {
        EnergyConfig {
            weights: EnergyWeights {
                lambda1: self.lambda1,
                lambda2: self.lambda2,
            },
            fusion: FusionParams {
                alpha: self.alpha,
                fusion_radius: self.fusion_radius,
                ..FusionParams::default()
            },
            thresholds: FusibilityThresholds {
                theta_cf: self.theta_cf,
                theta_rf: self.theta_rf,
                contrast_floor: self.contrast_floor,
            },
            detail_contrast_floor: self.detail_contrast_floor,
            ..EnergyConfig::default()
        }
    }

    /// Solver configuration; the search starts at the centre of the box.
    pub fn optimizer(&self) -> binotone::Result<OptimizerConfig> {
        let mid = 0.5 * (self.beta_min + self.beta_max);
        let config = OptimizerConfig {
            beta_bounds: (self.beta_min, self.beta_max),
            init: (mid, mid),
            energy: self.energy(),
            operator: self.operator(),
            canny: self.canny(),
            ..OptimizerConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}
