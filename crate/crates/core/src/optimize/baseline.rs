use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::steer::Rotation;
use crate::xcorr::{XiBlocks, XiEvaluator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineResult {
    pub rotation: Rotation,
    pub score: f64,
    pub evaluations: u64,
}

fn counts(step: f64) -> (usize, usize) {
    ((2.0 * PI / step - 1e-9).ceil() as usize, (PI / step - 1e-9).ceil() as usize + 1)
}

/// Number of grid points the exhaustive search visits at `step`.
pub fn baseline_evaluations(step: f64) -> u64 {
    let (na, nb) = counts(step);
    (na * na * nb) as u64
}

/// Brute-force maximum of the correlation at band `l_cut` over the full
/// Euler grid `alpha, gamma = j step < 2pi`, `beta = j step` clamped to `pi`.
pub fn exhaustive_baseline(xi: &XiBlocks, l_cut: usize, angular_step: f64) -> Result<BaselineResult> {
    if !(angular_step > 0.0 && angular_step.is_finite()) {
        return Err(invalid("angular step must be positive"));
    }
    if l_cut > xi.l_max() {
        return Err(invalid(format!("band {l_cut} exceeds l_max {}", xi.l_max())));
    }
    let (na, nb) = counts(angular_step);
    let ring: Vec<f64> = (0..na).map(|j| j as f64 * angular_step).collect();
    let betas: Vec<f64> = (0..nb).map(|j| (j as f64 * angular_step).min(PI)).collect();
    let ev = XiEvaluator::new(xi);
    let per_beta = crate::par::map_slice(&betas, |&b| {
        let values = ev.grid(&ring, &[b], &ring, l_cut);
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, &v) in values.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    });
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for (ib, &(i, v)) in per_beta.iter().enumerate() {
        if v > best.2 {
            best = (ib, i, v);
        }
    }
    let (ib, i, score) = best;
    let rotation = Rotation::from_euler_zyz(ring[i / na], betas[ib], ring[i % na]);
    Ok(BaselineResult { rotation, score, evaluations: (na * na * nb) as u64 })
}

/// Correlation and `dC/dalpha` on an `(alpha, beta)` slice at fixed `gamma`,
/// laid out `[beta][alpha]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSlice {
    pub band: usize,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gamma: f64,
    pub values: Vec<f64>,
    pub d_alpha: Vec<f64>,
}

impl LandscapeSlice {
    /// Sign changes of `dC/dalpha` along each `alpha` row, summed over rows.
    pub fn sign_changes(&self) -> usize {
        let na = self.alphas.len();
        self.d_alpha
            .chunks(na)
            .map(|row| row.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count())
            .sum()
    }
}

pub fn landscape_slice(xi: &XiBlocks, band: usize, alphas: &[f64], betas: &[f64], gamma: f64) -> Result<LandscapeSlice> {
    if band > xi.l_max() {
        return Err(invalid(format!("band {band} exceeds l_max {}", xi.l_max())));
    }
    let ev = XiEvaluator::new(xi);
    let rows = crate::par::map_slice(betas, |&b| {
        alphas.iter().map(|&a| ev.derivatives([a, b, gamma], band)).map(|d| (d.value, d.grad[0])).collect::<Vec<_>>()
    });
    let (values, d_alpha) = rows.into_iter().flatten().unzip();
    Ok(LandscapeSlice { band, alphas: alphas.to_vec(), betas: betas.to_vec(), gamma, values, d_alpha })
}
