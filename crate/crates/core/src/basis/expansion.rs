use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::bessel::spherical_jn;
use super::harmonics::{legendre_table, legendre_table_into, tri_index};
use super::quadrature::gauss_legendre;
use super::spec::{BasisIndex, BasisSpec};
use super::volume::Volume;
use crate::error::{invalid, Error, Result};
use crate::par;

/// Coefficients of a function in a truncated ball-harmonics basis.
///
/// When `real` is set the coefficients obey
/// `f[k,l,-m] = (-1)^m conj(f[k,l,m])`, i.e. they describe a real function.
#[derive(Debug, Clone)]
pub struct BallExpansion {
    spec: Arc<BasisSpec>,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl BallExpansion {
    pub fn zeros(spec: Arc<BasisSpec>) -> Self {
        let n = spec.len();
        Self { spec, coeffs: vec![Complex64::new(0.0, 0.0); n], real: true }
    }

    pub fn from_coeffs(spec: Arc<BasisSpec>, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != spec.len() {
            return Err(invalid(format!("expected {} coefficients, got {}", spec.len(), coeffs.len())));
        }
        Ok(Self { spec, coeffs, real })
    }

    /// The expansion with a single unit coefficient at `idx`.
    pub fn unit(spec: Arc<BasisSpec>, idx: BasisIndex) -> Result<Self> {
        let pos = spec.index_of(idx).ok_or_else(|| invalid(format!("{idx:?} not in basis")))?;
        let mut e = Self::zeros(spec);
        e.coeffs[pos] = Complex64::new(1.0, 0.0);
        e.real = idx.m == 0;
        Ok(e)
    }

    pub fn spec(&self) -> &Arc<BasisSpec> {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeff(&self, idx: BasisIndex) -> Option<Complex64> {
        self.spec.index_of(idx).map(|i| self.coeffs[i])
    }

    /// The `K_l x (2l+1)` coefficient block of degree `l`.
    pub fn block(&self, l: usize) -> &[Complex64] {
        &self.coeffs[self.spec.block_range(l)]
    }

    pub fn block_mut(&mut self, l: usize) -> &mut [Complex64] {
        let r = self.spec.block_range(l);
        &mut self.coeffs[r]
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `<self, other> = sum conj(self) * other`; equals the L2 inner product
    /// of the represented functions.
    pub fn inner(&self, other: &BallExpansion) -> Result<Complex64> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    /// Zeroes every coefficient of degree above `l_cut`.
    pub fn lowpass(&self, l_cut: usize) -> BallExpansion {
        let mut out = self.clone();
        if l_cut < self.spec.l_max() {
            let start = self.spec.block_range(l_cut + 1).start;
            out.coeffs[start..].iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        }
        out
    }

    pub(crate) fn with_coeffs(&self, coeffs: Vec<Complex64>) -> BallExpansion {
        BallExpansion { spec: self.spec.clone(), coeffs, real: self.real }
    }
}

/// Number of Gauss-Legendre nodes used in the radial direction.
///
/// Products of two radial functions oscillate at up to `2 lambda_cut` over
/// `[0, 1]`; Gauss-Legendre needs a little over `lambda_cut / 2` nodes for
/// that.
pub fn radial_node_count(spec: &BasisSpec) -> usize {
    (spec.l_max() + 1).max((spec.lambda_cut() / 2.0).ceil() as usize + 12)
}

/// Precomputed quadrature for projecting voxel data onto a basis.
///
/// The volume is resampled by trilinear interpolation on a spherical product
/// grid: Gauss-Legendre in `r` (weight `r^2`) and in `cos theta`, uniform in
/// `phi`. Building the plan is the expensive part; it is reused across many
/// expansions with the same basis.
pub struct ExpansionPlan {
    spec: Arc<BasisSpec>,
    r_nodes: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    theta_weights: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
    /// Legendre tables, one per theta node.
    legendre: Vec<Vec<f64>>,
    /// `c_{lk} j_l(lambda_{lk} r_i) w_i r_i^2`, indexed `[l][k][i]`.
    radial: Vec<Vec<Vec<f64>>>,
    fft: Arc<dyn Fft<f64>>,
}

impl ExpansionPlan {
    pub fn new(spec: Arc<BasisSpec>) -> Self {
        let l_max = spec.l_max();
        let n_theta = 2 * l_max + 2;
        let n_phi = 2 * l_max + 2;
        let n_r = radial_node_count(&spec);

        let (xr, wr) = gauss_legendre(n_r);
        let r_nodes: Vec<f64> = xr.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let r_weights: Vec<f64> = wr.iter().zip(&r_nodes).map(|(w, r)| 0.5 * w * r * r).collect();

        let (xt, wt) = gauss_legendre(n_theta);
        let sin_theta: Vec<f64> = xt.iter().map(|x| (1.0 - x * x).sqrt()).collect();
        let legendre = xt.iter().zip(&sin_theta).map(|(&c, &s)| legendre_table(l_max, c, s)).collect();

        let phis: Vec<f64> = (0..n_phi).map(|q| 2.0 * PI * q as f64 / n_phi as f64).collect();

        let radial = (0..=l_max)
            .map(|l| {
                spec.roots(l)
                    .iter()
                    .zip(spec.norms(l))
                    .map(|(&root, &c)| {
                        r_nodes.iter().zip(&r_weights).map(|(&r, &w)| c * spherical_jn(l, root * r) * w).collect()
                    })
                    .collect()
            })
            .collect();

        let fft = FftPlanner::new().plan_fft_forward(n_phi);
        Self {
            spec,
            r_nodes,
            cos_theta: xt,
            sin_theta,
            theta_weights: wt,
            cos_phi: phis.iter().map(|p| p.cos()).collect(),
            sin_phi: phis.iter().map(|p| p.sin()).collect(),
            legendre,
            radial,
            fft,
        }
    }

    pub fn spec(&self) -> &Arc<BasisSpec> {
        &self.spec
    }

    pub fn expand(&self, v: &Volume) -> Result<BallExpansion> {
        self.expand_shifted(v, [0.0; 3])
    }

    /// Expands the window of `v` re-centered at `shift` (in voxels), i.e. the
    /// function `x -> v(x + shift)` restricted to the unit ball.
    pub fn expand_shifted(&self, v: &Volume, shift: [f64; 3]) -> Result<BallExpansion> {
        v.check_expandable()?;
        let (c, h) = (v.center(), v.half_width());
        let origin = [c + shift[0], c + shift[1], c + shift[2]];
        self.project(|p| v.sample([origin[0] + h * p[0], origin[1] + h * p[1], origin[2] + h * p[2]]))
    }

    /// Projects a function given at unit-ball coordinates, with the same
    /// quadrature but no voxel resampling.
    pub fn expand_fn(&self, f: impl Fn([f64; 3]) -> f64 + Sync) -> Result<BallExpansion> {
        self.project(f)
    }

    fn project(&self, f: impl Fn([f64; 3]) -> f64 + Sync) -> Result<BallExpansion> {
        let l_max = self.spec.l_max();
        let tri_len = tri_index(l_max, l_max) + 1;
        let n_phi = self.cos_phi.len();
        let ring_weight = 2.0 * PI / n_phi as f64;

        // Angular transform on every radial shell: a[i][(l,m)], m >= 0.
        let shells: Vec<Vec<Complex64>> = par::map_range(self.r_nodes.len(), |i| {
            let r = self.r_nodes[i];
            let mut acc = vec![Complex64::new(0.0, 0.0); tri_len];
            let mut ring = vec![Complex64::new(0.0, 0.0); n_phi];
            let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
            for (j, table) in self.legendre.iter().enumerate() {
                let (ct, st) = (self.cos_theta[j], self.sin_theta[j]);
                for q in 0..n_phi {
                    let p = [r * st * self.cos_phi[q], r * st * self.sin_phi[q], r * ct];
                    ring[q] = Complex64::new(f(p), 0.0);
                }
                self.fft.process_with_scratch(&mut ring, &mut scratch);
                let w = self.theta_weights[j] * ring_weight;
                for m in 0..=l_max {
                    let fm = ring[m] * w;
                    for l in m..=l_max {
                        let t = tri_index(l, m);
                        acc[t] += fm * table[t];
                    }
                }
            }
            acc
        });

        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.spec.len()];
        for l in 0..=l_max {
            let width = 2 * l + 1;
            let block = &mut coeffs[self.spec.block_range(l)];
            for (k, radial) in self.radial[l].iter().enumerate() {
                for m in 0..=l {
                    let t = tri_index(l, m);
                    let mut s = Complex64::new(0.0, 0.0);
                    for (shell, &w) in shells.iter().zip(radial) {
                        s += shell[t] * w;
                    }
                    block[k * width + l + m] = s;
                    if m > 0 {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        block[k * width + l - m] = s.conj() * sign;
                    }
                }
            }
        }
        BallExpansion::from_coeffs(self.spec.clone(), coeffs, true)
    }
}

/// Projects `v` onto the basis described by `spec`.
pub fn expand(v: &Volume, spec: &Arc<BasisSpec>) -> Result<BallExpansion> {
    ExpansionPlan::new(spec.clone()).expand(v)
}

/// Evaluates the truncated series on an `n^3` grid. Voxels at or beyond unit
/// radius are zero. For expansions not flagged real, the real part is taken.
pub fn synthesize(e: &BallExpansion, n: usize, voxel_size: f64) -> Result<Volume> {
    if n < 8 {
        return Err(invalid(format!("grid size {n} must be >= 8")));
    }
    let spec = e.spec();
    let l_max = spec.l_max();
    let h = n as f64 / 2.0;
    let mut out = Volume::zeros(n, voxel_size);
    let tri_len = tri_index(l_max, l_max) + 1;
    par::for_each_chunk_mut(out.data_mut(), n * n, |z, slab| {
        let mut table = vec![0.0; tri_len];
        let mut phase = vec![Complex64::new(0.0, 0.0); l_max + 1];
        for y in 0..n {
            for x in 0..n {
                let p = [(x as f64 - h) / h, (y as f64 - h) / h, (z as f64 - h) / h];
                let rho2 = p[0] * p[0] + p[1] * p[1];
                let r = (rho2 + p[2] * p[2]).sqrt();
                if r >= 1.0 {
                    continue;
                }
                let (ct, st) = if r > 0.0 { (p[2] / r, rho2.sqrt() / r) } else { (1.0, 0.0) };
                legendre_table_into(l_max, ct, st, &mut table);
                let phi = p[1].atan2(p[0]);
                for (m, ph) in phase.iter_mut().enumerate() {
                    *ph = Complex64::from_polar(1.0, m as f64 * phi);
                }
                slab[x + n * y] = point_value(e, r, &table, &phase);
            }
        }
    });
    Ok(out)
}

fn point_value(e: &BallExpansion, r: f64, table: &[f64], phase: &[Complex64]) -> f64 {
    let spec = e.spec();
    let mut total = 0.0;
    for l in 0..=spec.l_max() {
        let width = 2 * l + 1;
        let block = e.block(l);
        for (k, (&root, &c)) in spec.roots(l).iter().zip(spec.norms(l)).enumerate() {
            let radial = c * spherical_jn(l, root * r);
            let row = &block[k * width..(k + 1) * width];
            let mut s = row[l].re * table[tri_index(l, 0)];
            if e.is_real() {
                for m in 1..=l {
                    s += 2.0 * (row[l + m] * phase[m]).re * table[tri_index(l, m)];
                }
            } else {
                for m in 1..=l {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let y = phase[m] * table[tri_index(l, m)];
                    s += (row[l + m] * y).re + sign * (row[l - m] * y.conj()).re;
                }
            }
            total += radial * s;
        }
    }
    total
}

/// `lowpass` as a free function, mirroring the method.
pub fn lowpass(e: &BallExpansion, l_cut: usize) -> BallExpansion {
    e.lowpass(l_cut)
}
