//! Serialized outputs: the optimize report, the evaluate report and the batch
//! CSV rows. Every schema carries `schema_version`.

use serde::{Deserialize, Serialize};

use binotone::energy::EnergyBreakdown;

pub const SCHEMA_VERSION: u32 = 1;

/// File names written next to `report.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFiles {
    pub left: String,
    pub right: String,
    pub side_by_side: String,
    pub anaglyph: String,
    pub report: String,
    pub trajectory: String,
}

impl Default for OutputFiles {
    fn default() -> Self {
        Self {
            left: "left.png".into(),
            right: "right.png".into(),
            side_by_side: "side_by_side.png".into(),
            anaglyph: "anaglyph.png".into(),
            report: "report.json".into(),
            trajectory: "trajectory.jsonl".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub input: String,
    pub width: usize,
    pub height: usize,
    pub beta_left: f64,
    pub beta_right: f64,
    /// Energy of the written pair, from the in-memory float images.
    pub energy: EnergyBreakdown,
    /// Midpoint beta of the monocular baseline.
    pub baseline_beta: f64,
    /// Energy of the monocular baseline shown to both eyes.
    pub baseline: EnergyBreakdown,
    /// `|E_d(L, R) - E_d(R, L)|` for the written pair.
    pub detail_swap_delta: f64,
    pub iterations: usize,
    pub stage1_iterations: usize,
    pub stage2_iterations: usize,
    pub converged: bool,
    /// Wall-clock seconds per iteration; only present with `--timing` so
    /// that reports stay byte-identical across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sec_per_iter: Option<f64>,
    pub outputs: OutputFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub energy: EnergyBreakdown,
    /// Breakdown with the two views exchanged.
    pub swapped: EnergyBreakdown,
    pub detail_swap_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub schema_version: u32,
    pub file: String,
    pub beta_l: f64,
    pub beta_r: f64,
    pub e_c: f64,
    pub e_d: f64,
    pub e_f: f64,
    pub e: f64,
    pub e_c_mono: f64,
    pub e_d_mono: f64,
    pub e_mono: f64,
    pub iterations: f64,
    pub sec_per_iter: f64,
}

impl BatchRow {
    fn values(&self) -> [f64; 11] {
        [
            self.beta_l,
            self.beta_r,
            self.e_c,
            self.e_d,
            self.e_f,
            self.e,
            self.e_c_mono,
            self.e_d_mono,
            self.e_mono,
            self.iterations,
            self.sec_per_iter,
        ]
    }

    /// Column means over `rows`, labelled `mean`. `None` for no rows.
    pub fn mean_of(rows: &[BatchRow]) -> Option<BatchRow> {
        if rows.is_empty() {
            return None;
        }
        let mut sum = [0.0; 11];
        for r in rows {
            for (s, v) in sum.iter_mut().zip(r.values()) {
                *s += v;
            }
        }
        let m = sum.map(|s| s / rows.len() as f64);
        Some(BatchRow {
            schema_version: SCHEMA_VERSION,
            file: "mean".into(),
            beta_l: m[0],
            beta_r: m[1],
            e_c: m[2],
            e_d: m[3],
            e_f: m[4],
            e: m[5],
            e_c_mono: m[6],
            e_d_mono: m[7],
            e_mono: m[8],
            iterations: m[9],
            sec_per_iter: m[10],
        })
    }
}
