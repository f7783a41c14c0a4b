use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::basis::BallExpansion;
use crate::error::{invalid, Error, Result};
use crate::steer::recurrence::{HalfAngles, PairTable};
use crate::steer::{wigner_D, Rotation};

/// Per-degree correlation kernels `xi^s_l` for one shift `s`.
///
/// Block `l` is a row-major `(2l+1) x (2l+1)` complex matrix with
/// `xi_{m m'} = sum_k conj(t[k,l,m]) f_s[k,l,m']`, so that
/// `sum_l sum_{m,m'} xi_{m m'} D^l_{m m'}(g) = <t, R_g f_s>`.
#[derive(Debug, Clone)]
pub struct XiBlocks {
    l_max: usize,
    blocks: Vec<Vec<Complex64>>,
    shift: [i32; 3],
}

impl XiBlocks {
    pub fn from_blocks(blocks: Vec<Vec<Complex64>>, shift: [i32; 3]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(invalid("need at least the degree-0 block"));
        }
        for (l, b) in blocks.iter().enumerate() {
            if b.len() != (2 * l + 1) * (2 * l + 1) {
                return Err(invalid(format!("block {l} has {} entries", b.len())));
            }
        }
        Ok(Self { l_max: blocks.len() - 1, blocks, shift })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn shift(&self) -> [i32; 3] {
        self.shift
    }

    pub fn with_shift(mut self, shift: [i32; 3]) -> Self {
        self.shift = shift;
        self
    }

    pub fn block(&self, l: usize) -> &[Complex64] {
        &self.blocks[l]
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    /// `sum_{m,m'} |xi_{l m m'}|^2` for each degree.
    pub fn energy_by_degree(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.iter().map(|c| c.norm_sqr()).sum()).collect()
    }

    pub fn total_energy(&self) -> f64 {
        self.energy_by_degree().iter().sum()
    }

    /// Kernel of `E -> C(E Q)`: `xi'^l = xi^l D^l(Q)^T`, truncated at `l_cut`.
    pub fn in_chart(&self, q: &Rotation, l_cut: usize) -> XiBlocks {
        let l_cut = l_cut.min(self.l_max);
        let stack = wigner_D(l_cut, q);
        let blocks = (0..=l_cut)
            .map(|l| {
                let w = 2 * l + 1;
                let (xi, d) = (&self.blocks[l], stack.block(l));
                let mut out = vec![Complex64::new(0.0, 0.0); w * w];
                for m in 0..w {
                    for mp in 0..w {
                        let x = xi[m * w + mp];
                        if x == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for k in 0..w {
                            out[m * w + k] += x * d[k * w + mp];
                        }
                    }
                }
                out
            })
            .collect();
        XiBlocks { l_max: l_cut, blocks, shift: self.shift }
    }
}

/// Builds `xi` from template and shifted-subtomogram coefficients.
pub fn xi_coefficients(t: &BallExpansion, f_s: &BallExpansion) -> Result<XiBlocks> {
    if t.spec() != f_s.spec() {
        return Err(Error::SpecMismatch);
    }
    let spec = t.spec();
    let blocks = (0..=spec.l_max())
        .map(|l| {
            let w = 2 * l + 1;
            let (tb, fb) = (t.block(l), f_s.block(l));
            let mut out = vec![Complex64::new(0.0, 0.0); w * w];
            for (trow, frow) in tb.chunks(w).zip(fb.chunks(w)) {
                for (m, tv) in trow.iter().enumerate() {
                    let tc = tv.conj();
                    let row = &mut out[m * w..(m + 1) * w];
                    for (o, fv) in row.iter_mut().zip(frow) {
                        *o += tc * fv;
                    }
                }
            }
            out
        })
        .collect();
    Ok(XiBlocks { l_max: spec.l_max(), blocks, shift: [0; 3] })
}

/// Value, gradient and Hessian of the correlation in `(alpha, beta, gamma)`.
#[derive(Debug, Clone, Copy)]
pub struct Derivatives {
    pub value: f64,
    pub imag: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl Derivatives {
    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn hess_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.hess[i][j])
    }
}

/// Evaluates the truncated correlation `C_L(g) = sum_{l<=L} sum xi D^l(g)`
/// in Euler coordinates.
///
/// `xi` is stored pair-major to match the degree recurrence, so each
/// evaluation is one sweep per order pair with no intermediate d-matrices.
#[derive(Debug, Clone)]
pub struct XiEvaluator {
    table: Arc<PairTable>,
    xi: Vec<Complex64>,
    l_max: usize,
}

fn phase_row(l_cut: usize, angle: f64) -> Vec<Complex64> {
    let li = l_cut as i32;
    (-li..=li).map(|m| Complex64::from_polar(1.0, -(m as f64) * angle)).collect()
}

impl XiEvaluator {
    pub fn new(xi: &XiBlocks) -> Self {
        let table = PairTable::shared(xi.l_max);
        let mut flat = vec![Complex64::new(0.0, 0.0); table.entries];
        for pair in &table.pairs {
            for l in pair.l0..=xi.l_max {
                let w = 2 * l + 1;
                let li = l as i32;
                flat[pair.start + l - pair.l0] = xi.blocks[l][(pair.m + li) as usize * w + (pair.mp + li) as usize];
            }
        }
        Self { table, xi: flat, l_max: xi.l_max }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Complex value of the truncated sum; the real part is the correlation.
    pub fn value(&self, angles: [f64; 3], l_cut: usize) -> Complex64 {
        let l_cut = l_cut.min(self.l_max);
        let half = HalfAngles::new(angles[1], l_cut);
        let pa = phase_row(l_cut, angles[0]);
        let pg = phase_row(l_cut, angles[2]);
        let li = l_cut as i32;
        let mut total = Complex64::new(0.0, 0.0);
        for pair in self.table.active(l_cut) {
            let xi = &self.xi[pair.start..];
            let mut s = Complex64::new(0.0, 0.0);
            self.table.sweep(pair, l_cut, &half, |off, d| s += xi[off] * d);
            total += s * pa[(pair.m + li) as usize] * pg[(pair.mp + li) as usize];
        }
        total
    }

    pub fn derivatives(&self, angles: [f64; 3], l_cut: usize) -> Derivatives {
        let l_cut = l_cut.min(self.l_max);
        let half = HalfAngles::new(angles[1], l_cut);
        let pa = phase_row(l_cut, angles[0]);
        let pg = phase_row(l_cut, angles[2]);
        let li = l_cut as i32;
        let zero = Complex64::new(0.0, 0.0);
        let (mut value, mut imag) = (0.0, 0.0);
        let mut g = [0.0; 3];
        let mut h = [[0.0; 3]; 3];
        for pair in self.table.active(l_cut) {
            let xi = &self.xi[pair.start..];
            let (mut s0, mut s1, mut s2) = (zero, zero, zero);
            self.table.sweep2(pair, l_cut, &half, |off, d, d1, d2| {
                let x = xi[off];
                s0 += x * d;
                s1 += x * d1;
                s2 += x * d2;
            });
            let p = pa[(pair.m + li) as usize] * pg[(pair.mp + li) as usize];
            let (z0, z1, z2) = (s0 * p, s1 * p, s2 * p);
            let (a, b) = (pair.m as f64, pair.mp as f64);
            value += z0.re;
            imag += z0.im;
            g[0] += a * z0.im;
            g[1] += z1.re;
            g[2] += b * z0.im;
            h[0][0] -= a * a * z0.re;
            h[0][1] += a * z1.im;
            h[0][2] -= a * b * z0.re;
            h[1][1] += z2.re;
            h[1][2] += b * z1.im;
            h[2][2] -= b * b * z0.re;
        }
        h[1][0] = h[0][1];
        h[2][0] = h[0][2];
        h[2][1] = h[1][2];
        Derivatives { value, imag, grad: g, hess: h }
    }

    /// `S_{m m'}(beta) = sum_l xi_{l m m'} d^l_{m m'}(beta)` as a row-major
    /// `(2L+1)^2` matrix; the correlation is then
    /// `Re sum_{m m'} S_{m m'} exp(-i m alpha) exp(-i m' gamma)`.
    pub fn beta_slice(&self, beta: f64, l_cut: usize) -> Vec<Complex64> {
        let l_cut = l_cut.min(self.l_max);
        let half = HalfAngles::new(beta, l_cut);
        let w = 2 * l_cut + 1;
        let li = l_cut as i32;
        let mut out = vec![Complex64::new(0.0, 0.0); w * w];
        for pair in self.table.active(l_cut) {
            let xi = &self.xi[pair.start..];
            let mut s = Complex64::new(0.0, 0.0);
            self.table.sweep(pair, l_cut, &half, |off, d| s += xi[off] * d);
            out[(pair.m + li) as usize * w + (pair.mp + li) as usize] = s;
        }
        out
    }

    /// Correlation on a tensor grid, returned as `[beta][alpha][gamma]`.
    /// Each `(alpha, beta, gamma)` triple is one evaluation of the sum.
    pub fn grid(&self, alphas: &[f64], betas: &[f64], gammas: &[f64], l_cut: usize) -> Vec<f64> {
        let l_cut = l_cut.min(self.l_max);
        let w = 2 * l_cut + 1;
        let pas: Vec<Vec<Complex64>> = alphas.iter().map(|&a| phase_row(l_cut, a)).collect();
        let pgs: Vec<Vec<Complex64>> = gammas.iter().map(|&g| phase_row(l_cut, g)).collect();
        let per_beta = crate::par::map_slice(betas, |&beta| {
            let s = self.beta_slice(beta, l_cut);
            let mut out = Vec::with_capacity(alphas.len() * gammas.len());
            let mut t = vec![Complex64::new(0.0, 0.0); w];
            for pa in &pas {
                t.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for (m, &ph) in pa.iter().enumerate() {
                    let row = &s[m * w..(m + 1) * w];
                    for (tv, sv) in t.iter_mut().zip(row) {
                        *tv += sv * ph;
                    }
                }
                for pg in &pgs {
                    let v: f64 = t.iter().zip(pg).map(|(a, b)| a.re * b.re - a.im * b.im).sum();
                    out.push(v);
                }
            }
            out
        });
        per_beta.into_iter().flatten().collect()
    }
}

/// Polar-angle distance below which the Euler chart is treated as singular.
pub const GIMBAL_MARGIN: f64 = 1e-3;

fn check_chart(g: &Rotation) -> Result<[f64; 3]> {
    let (a, b, c) = g.to_euler_zyz();
    if b < GIMBAL_MARGIN || b > std::f64::consts::PI - GIMBAL_MARGIN {
        return Err(Error::GimbalLock { beta: b });
    }
    Ok([a, b, c])
}

fn check_cut(xi: &XiBlocks, l_cut: usize) -> Result<()> {
    if l_cut > xi.l_max {
        return Err(invalid(format!("band {l_cut} exceeds l_max {}", xi.l_max)));
    }
    Ok(())
}

/// Complex value of the truncated correlation sum at `g`.
pub fn evaluate_complex(xi: &XiBlocks, g: &Rotation, l_cut: usize) -> Result<Complex64> {
    check_cut(xi, l_cut)?;
    let (a, b, c) = g.to_euler_zyz();
    Ok(XiEvaluator::new(xi).value([a, b, c], l_cut))
}

/// Real part of the truncated correlation sum at `g`.
pub fn evaluate(xi: &XiBlocks, g: &Rotation, l_cut: usize) -> Result<f64> {
    evaluate_complex(xi, g, l_cut).map(|c| c.re)
}

/// `(dC/dalpha, dC/dbeta, dC/dgamma)` at the Euler angles of `g`.
pub fn gradient(xi: &XiBlocks, g: &Rotation, l_cut: usize) -> Result<[f64; 3]> {
    check_cut(xi, l_cut)?;
    let angles = check_chart(g)?;
    Ok(XiEvaluator::new(xi).derivatives(angles, l_cut).grad)
}

/// Hessian of `C` in `(alpha, beta, gamma)` at the Euler angles of `g`.
pub fn hessian(xi: &XiBlocks, g: &Rotation, l_cut: usize) -> Result<Matrix3<f64>> {
    check_cut(xi, l_cut)?;
    let angles = check_chart(g)?;
    Ok(XiEvaluator::new(xi).derivatives(angles, l_cut).hess_matrix())
}

/// Fraction of kernel energy in degrees above `l_cut`.
pub fn energy_ratio(xi: &XiBlocks, l_cut: usize) -> Result<f64> {
    check_cut(xi, l_cut)?;
    let per = xi.energy_by_degree();
    let total: f64 = per.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    // an empty float sum is -0.0
    let above = per[l_cut + 1..].iter().fold(0.0, |a, b| a + b);
    Ok(above / total)
}

/// Term-count cost of evaluating up to `l_cut` relative to `l_max`:
/// `sum_{l<=l_cut} (2l+1)^2 / sum_{l<=l_max} (2l+1)^2`.
pub fn eval_cost_fraction(l_cut: usize, l_max: usize) -> f64 {
    let terms = |n: usize| (0..=n).map(|l| ((2 * l + 1) * (2 * l + 1)) as f64).sum::<f64>();
    terms(l_cut.min(l_max)) / terms(l_max)
}
