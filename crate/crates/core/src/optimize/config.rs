use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::steer::Rotation;

/// Knobs of the alignment search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub l_max: usize,
    /// Energy-ratio thresholds for automatic band selection, strictly decreasing.
    pub band_thresholds: Vec<f64>,
    /// Explicit bands; when set, `band_thresholds` is ignored.
    pub fixed_bands: Option<Vec<usize>>,
    /// Euler-grid step for seeding, radians.
    pub seed_grid_step: f64,
    pub max_candidates: usize,
    pub newton_max_iter: usize,
    /// Gradient norm tolerance relative to `|C|`.
    pub grad_tol: f64,
    /// Initial Levenberg parameter, relative to the Hessian norm.
    pub step_damping: f64,
    pub shift_radius: i32,
    pub shift_step: i32,
    /// Keep only the best candidate after each band.
    pub prune_after_band: bool,
    /// Radial frequency cutoff; `None` picks one from the grid size.
    pub lambda_cut: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            l_max: 42,
            band_thresholds: vec![0.5, 0.25, 0.05],
            fixed_bands: Some(vec![7, 12, 33]),
            seed_grid_step: PI / 8.0,
            max_candidates: 20,
            newton_max_iter: 30,
            grad_tol: 1e-7,
            step_damping: 1e-3,
            shift_radius: 4,
            shift_step: 2,
            prune_after_band: false,
            lambda_cut: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.band_thresholds.is_empty() && self.fixed_bands.is_none() {
            return Err(invalid("need band thresholds or fixed bands"));
        }
        if self.band_thresholds.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(invalid("band thresholds must lie in (0, 1)"));
        }
        if self.band_thresholds.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("band thresholds must be strictly decreasing"));
        }
        if let Some(bands) = &self.fixed_bands {
            if bands.is_empty() {
                return Err(invalid("band list is empty"));
            }
            if bands.windows(2).any(|w| w[1] <= w[0]) {
                return Err(invalid("bands must be strictly increasing"));
            }
            if bands.iter().any(|&b| b > self.l_max) {
                return Err(invalid(format!("bands must not exceed l_max = {}", self.l_max)));
            }
        }
        if !(self.seed_grid_step > 0.0 && self.seed_grid_step <= PI) {
            return Err(invalid("seed grid step must lie in (0, pi]"));
        }
        if self.max_candidates == 0 || self.newton_max_iter == 0 {
            return Err(invalid("candidate and iteration counts must be positive"));
        }
        if !(self.grad_tol > 0.0 && self.step_damping > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.shift_radius < 0 || self.shift_step < 1 {
            return Err(invalid("shift radius must be >= 0 and shift step >= 1"));
        }
        if let Some(c) = self.lambda_cut {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid("lambda cut must be positive"));
            }
        }
        Ok(())
    }
}

/// One Newton iteration of the winning candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub band: usize,
    /// ZYZ Euler angles of the iterate.
    pub angles: [f64; 3],
    pub score: f64,
    pub grad_norm: f64,
    /// 0 for plain Euler angles, 1 for the pole-avoiding offset chart.
    pub chart: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub shift: [i32; 3],
    /// Rotation `g` maximizing `<t, R_g f_s>`; it maps the subtomogram onto the template.
    pub rotation: Rotation,
    /// `C / (|t| |f_s|)`.
    pub score: f64,
    pub raw_score: f64,
    pub bands: Vec<usize>,
    pub shifts_evaluated: usize,
    pub candidates_evaluated: usize,
    /// Correlation evaluations summed over all shifts.
    pub evaluations_per_band: BTreeMap<usize, u64>,
    /// Correlation evaluations spent on the winning shift alone.
    pub evaluations_best_shift: u64,
    pub wall_time: f64,
    pub converged: bool,
    pub final_grad_norm: f64,
    /// Score of the winning candidate's seed at the highest band.
    pub seed_score: f64,
    pub trace: Vec<TraceEntry>,
}

impl AlignmentResult {
    pub fn total_evaluations(&self) -> u64 {
        self.evaluations_per_band.values().sum()
    }
}
