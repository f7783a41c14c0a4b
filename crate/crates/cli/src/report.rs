use std::path::Path;

use serde::{Deserialize, Serialize};

use bhalign::optimize::{AlignmentResult, BandRow, OptimizerConfig};
use bhalign::volio::PhantomSpec;
use bhalign::Rotation;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Contents of `truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    /// Rotation applied to the template, as `(w, x, y, z)`.
    pub quaternion: [f64; 4],
    pub euler_zyz_deg: [f64; 3],
    pub shift: [i32; 3],
    /// What `align` should return: the inverse of the applied rotation.
    pub expected_alignment: [f64; 4],
    pub generator: String,
    pub spec: PhantomSpec,
}

impl Truth {
    pub fn rotation(&self) -> Rotation {
        let q = self.quaternion;
        Rotation::from_quaternion(q[0], q[1], q[2], q[3])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub load: f64,
    pub align: f64,
    pub bandscan: f64,
    pub baseline: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthCheck {
    pub geodesic_error_deg: f64,
    pub shift_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub threads: usize,
    pub template: String,
    pub subtomo: String,
    pub wedge_deg: Option<f64>,
    pub config: OptimizerConfig,
    pub result: AlignmentResult,
    /// Band scan of the kernel at the recovered shift.
    pub band_energy_ratios: Vec<BandRow>,
    pub truth: Option<TruthCheck>,
    pub times: PhaseTimes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub step_deg: f64,
    pub band: usize,
    pub evaluations: u64,
    pub rotation: Rotation,
    pub score: f64,
    pub wall_time: f64,
    pub geodesic_error_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub version: String,
    pub threads: usize,
    pub config: OptimizerConfig,
    pub align: AlignmentResult,
    pub align_error_deg: Option<f64>,
    pub baseline: BaselineSummary,
    /// Baseline evaluations over all of ours (every shift).
    pub evaluation_ratio: f64,
    /// Baseline evaluations over ours at the winning shift alone.
    pub evaluation_ratio_same_kernel: f64,
    /// Geodesic distance between the two answers, degrees.
    pub agreement_deg: f64,
    pub within_grid_resolution: bool,
    pub times: PhaseTimes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionDump {
    pub version: String,
    pub n: usize,
    pub l_max: usize,
    pub lambda_cut: f64,
    pub count: usize,
    pub energy: f64,
    pub energy_by_degree: Vec<f64>,
    /// `(k, l, m, re, im)` in storage order.
    pub coefficients: Vec<(usize, usize, i32, f64, f64)>,
}

pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
