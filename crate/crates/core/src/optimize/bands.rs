use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::xcorr::{energy_ratio, eval_cost_fraction, XiBlocks};

/// For each threshold, the smallest band whose energy ratio is at or below
/// it; sorted and deduplicated.
pub fn select_bands(xi: &XiBlocks, thresholds: &[f64]) -> Result<Vec<usize>> {
    if thresholds.is_empty() {
        return Err(invalid("no thresholds"));
    }
    let per = xi.energy_by_degree();
    let total: f64 = per.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let ratio: Vec<f64> = (0..per.len()).map(|l| per[l + 1..].iter().sum::<f64>() / total).collect();
    let mut bands: Vec<usize> = thresholds
        .iter()
        .map(|&tau| ratio.iter().position(|&r| r <= tau).unwrap_or(per.len() - 1))
        .collect();
    bands.sort_unstable();
    bands.dedup();
    Ok(bands)
}

/// One row of a band scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub l: usize,
    pub energy_ratio: f64,
    pub eval_cost_fraction: f64,
}

/// Energy ratio and relative evaluation cost for every band `0..=l_max`.
pub fn band_scan(xi: &XiBlocks) -> Result<Vec<BandRow>> {
    let l_max = xi.l_max();
    (0..=l_max)
        .map(|l| {
            Ok(BandRow { l, energy_ratio: energy_ratio(xi, l)?, eval_cost_fraction: eval_cost_fraction(l, l_max) })
        })
        .collect()
}
