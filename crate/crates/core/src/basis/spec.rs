use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::{bessel_zeros_below, norm_for_root};
use crate::error::{invalid, Result};

/// Radial index `k >= 1`, degree `l` and order `-l <= m <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    pub k: usize,
    pub l: usize,
    pub m: i32,
}

/// Retained index set of a truncated ball-harmonics basis.
///
/// A pair `(l, k)` is kept when `l <= l_max` and the eigen-frequency
/// `lambda_{l,k}` does not exceed `lambda_cut`. Coefficients are laid out
/// degree by degree; within degree `l` the block is a `K_l x (2l+1)` matrix
/// stored row-major (radial index major, order `m` fastest).
#[derive(Debug, Clone)]
pub struct BasisSpec {
    l_max: usize,
    lambda_cut: f64,
    roots: Vec<Vec<f64>>,
    norms: Vec<Vec<f64>>,
    offsets: Vec<usize>,
}

impl PartialEq for BasisSpec {
    fn eq(&self, other: &Self) -> bool {
        self.l_max == other.l_max
            && self.lambda_cut.to_bits() == other.lambda_cut.to_bits()
            && self.offsets == other.offsets
    }
}

impl BasisSpec {
    pub fn build(l_max: usize, lambda_cut: f64) -> Result<Self> {
        if !(lambda_cut.is_finite() && lambda_cut >= PI) {
            return Err(invalid(format!(
                "lambda_cut {lambda_cut} retains no radial index for l = 0 (needs >= pi)"
            )));
        }
        let roots: Vec<Vec<f64>> = (0..=l_max).map(|l| bessel_zeros_below(l, lambda_cut)).collect();
        let norms = roots
            .iter()
            .enumerate()
            .map(|(l, rs)| rs.iter().map(|&r| norm_for_root(l, r)).collect())
            .collect();
        let mut offsets = Vec::with_capacity(l_max + 2);
        let mut acc = 0;
        for (l, rs) in roots.iter().enumerate() {
            offsets.push(acc);
            acc += rs.len() * (2 * l + 1);
        }
        offsets.push(acc);
        Ok(Self { l_max, lambda_cut, roots, norms, offsets })
    }

    /// Basis sized for an `n^3` grid: cutoff at the voxel Nyquist frequency
    /// `pi n / 2`, lowered if needed so that at most `n^3 / 4` coefficients
    /// are retained.
    pub fn for_grid(l_max: usize, n: usize) -> Result<Self> {
        Self::build(l_max, Self::default_lambda_cut(l_max, n))
    }

    pub fn default_lambda_cut(l_max: usize, n: usize) -> f64 {
        let nyquist = PI * n as f64 / 2.0;
        let budget = n * n * n / 4;
        let mut all: Vec<(f64, usize)> = (0..=l_max)
            .flat_map(|l| bessel_zeros_below(l, nyquist).into_iter().map(move |r| (r, 2 * l + 1)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: usize = all.iter().map(|a| a.1).sum();
        if total <= budget {
            return nyquist;
        }
        let mut count = 0;
        let mut cut = PI;
        for (root, mult) in all {
            if count + mult > budget {
                break;
            }
            count += mult;
            cut = root;
        }
        // sit between the last kept root and the next one
        cut + 1e-9 * cut
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn lambda_cut(&self) -> f64 {
        self.lambda_cut
    }

    /// Number of retained radial indices at degree `l`.
    pub fn radial_count(&self, l: usize) -> usize {
        self.roots.get(l).map_or(0, Vec::len)
    }

    pub fn roots(&self, l: usize) -> &[f64] {
        &self.roots[l]
    }

    pub fn norms(&self, l: usize) -> &[f64] {
        &self.norms[l]
    }

    pub fn root(&self, l: usize, k: usize) -> f64 {
        self.roots[l][k - 1]
    }

    pub fn norm(&self, l: usize, k: usize) -> f64 {
        self.norms[l][k - 1]
    }

    /// Total number of coefficients.
    pub fn len(&self) -> usize {
        self.offsets[self.l_max + 1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block_range(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l + 1]
    }

    pub fn index_of(&self, idx: BasisIndex) -> Option<usize> {
        let BasisIndex { k, l, m } = idx;
        if l > self.l_max || k == 0 || k > self.radial_count(l) || m.unsigned_abs() as usize > l {
            return None;
        }
        Some(self.offsets[l] + (k - 1) * (2 * l + 1) + (m + l as i32) as usize)
    }

    /// All retained indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = BasisIndex> + '_ {
        (0..=self.l_max).flat_map(move |l| {
            (1..=self.radial_count(l)).flat_map(move |k| {
                (-(l as i32)..=l as i32).map(move |m| BasisIndex { k, l, m })
            })
        })
    }
}
