use num_complex::Complex64;

use super::recurrence::{HalfAngles, PairTable};
use super::rotation::Rotation;
use crate::basis::BallExpansion;

/// Small-d matrices `d^l(beta)` for `l = 0..=l_max`, each a row-major
/// `(2l+1) x (2l+1)` block (rows `m`, columns `m'`, both from `-l`).
#[derive(Debug, Clone)]
pub struct WignerSmall {
    pub l_max: usize,
    pub d: Vec<Vec<f64>>,
    /// First and second derivatives in `beta`, if requested.
    pub d1: Option<Vec<Vec<f64>>>,
    pub d2: Option<Vec<Vec<f64>>>,
}

fn zero_blocks(l_max: usize) -> Vec<Vec<f64>> {
    (0..=l_max).map(|l| vec![0.0; (2 * l + 1) * (2 * l + 1)]).collect()
}

#[inline]
fn slot(l: usize, m: i32, mp: i32) -> usize {
    let w = 2 * l + 1;
    (m + l as i32) as usize * w + (mp + l as i32) as usize
}

impl WignerSmall {
    pub fn new(l_max: usize, beta: f64, derivatives: bool) -> Self {
        let table = PairTable::shared(l_max);
        let angles = HalfAngles::new(beta, l_max);
        let mut d = zero_blocks(l_max);
        if !derivatives {
            for pair in table.active(l_max) {
                table.sweep(pair, l_max, &angles, |off, v| {
                    let l = pair.l0 + off;
                    d[l][slot(l, pair.m, pair.mp)] = v;
                });
            }
            return Self { l_max, d, d1: None, d2: None };
        }
        let mut d1 = zero_blocks(l_max);
        let mut d2 = zero_blocks(l_max);
        for pair in table.active(l_max) {
            table.sweep2(pair, l_max, &angles, |off, v, v1, v2| {
                let l = pair.l0 + off;
                let s = slot(l, pair.m, pair.mp);
                d[l][s] = v;
                d1[l][s] = v1;
                d2[l][s] = v2;
            });
        }
        Self { l_max, d, d1: Some(d1), d2: Some(d2) }
    }
}

/// `d^l(beta)` as a row-major `(2l+1)^2` matrix.
pub fn wigner_d_small(l: usize, beta: f64) -> Vec<f64> {
    WignerSmall::new(l, beta, false).d.pop().unwrap_or_default()
}

/// Wigner-D blocks `D^l(g)` for `l = 0..=l_max`, with
/// `D^l_{m m'}(alpha, beta, gamma) = exp(-i m alpha) d^l_{m m'}(beta) exp(-i m' gamma)`.
#[derive(Debug, Clone)]
pub struct WignerStack {
    pub l_max: usize,
    pub blocks: Vec<Vec<Complex64>>,
}

impl WignerStack {
    pub fn block(&self, l: usize) -> &[Complex64] {
        &self.blocks[l]
    }

    pub fn get(&self, l: usize, m: i32, mp: i32) -> Complex64 {
        self.blocks[l][slot(l, m, mp)]
    }

    /// Blockwise matrix product `self * other`.
    pub fn compose(&self, other: &WignerStack) -> WignerStack {
        let l_max = self.l_max.min(other.l_max);
        let blocks = (0..=l_max)
            .map(|l| {
                let w = 2 * l + 1;
                let (a, b) = (&self.blocks[l], &other.blocks[l]);
                let mut out = vec![Complex64::new(0.0, 0.0); w * w];
                for i in 0..w {
                    for k in 0..w {
                        let aik = a[i * w + k];
                        for j in 0..w {
                            out[i * w + j] += aik * b[k * w + j];
                        }
                    }
                }
                out
            })
            .collect();
        WignerStack { l_max, blocks }
    }

    /// Largest `|D D^H - I|` entry over all blocks.
    pub fn unitarity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, b) in self.blocks.iter().enumerate() {
            let w = 2 * l + 1;
            for i in 0..w {
                for j in 0..w {
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..w {
                        s += b[i * w + k] * b[j * w + k].conj();
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((s - expect).norm());
                }
            }
        }
        worst
    }
}

fn phases(l_max: usize, angle: f64) -> Vec<Complex64> {
    // exp(-i m angle) for m = -l_max..=l_max
    let li = l_max as i32;
    (-li..=li).map(|m| Complex64::from_polar(1.0, -(m as f64) * angle)).collect()
}

fn assemble(l_max: usize, small: &[Vec<f64>], alpha: f64, gamma: f64, factor: impl Fn(i32, i32) -> Complex64) -> WignerStack {
    let pa = phases(l_max, alpha);
    let pg = phases(l_max, gamma);
    let li = l_max as i32;
    let blocks = (0..=l_max)
        .map(|l| {
            let lii = l as i32;
            let mut out = Vec::with_capacity((2 * l + 1) * (2 * l + 1));
            for m in -lii..=lii {
                for mp in -lii..=lii {
                    let v = small[l][slot(l, m, mp)];
                    out.push(pa[(m + li) as usize] * pg[(mp + li) as usize] * v * factor(m, mp));
                }
            }
            out
        })
        .collect();
    WignerStack { l_max, blocks }
}

#[allow(non_snake_case)]
pub fn wigner_D(l_max: usize, g: &Rotation) -> WignerStack {
    let (alpha, beta, gamma) = g.to_euler_zyz();
    wigner_D_euler(l_max, alpha, beta, gamma)
}

#[allow(non_snake_case)]
pub fn wigner_D_euler(l_max: usize, alpha: f64, beta: f64, gamma: f64) -> WignerStack {
    let small = WignerSmall::new(l_max, beta, false);
    assemble(l_max, &small.d, alpha, gamma, |_, _| Complex64::new(1.0, 0.0))
}

/// Partial derivatives of `D^l` with respect to `(alpha, beta, gamma)` at
/// the ZYZ Euler angles of `g`.
#[allow(non_snake_case)]
pub fn wigner_D_grad(l_max: usize, g: &Rotation) -> [WignerStack; 3] {
    let (alpha, beta, gamma) = g.to_euler_zyz();
    wigner_D_grad_euler(l_max, alpha, beta, gamma)
}

#[allow(non_snake_case)]
pub fn wigner_D_grad_euler(l_max: usize, alpha: f64, beta: f64, gamma: f64) -> [WignerStack; 3] {
    let small = WignerSmall::new(l_max, beta, true);
    let d1 = small.d1.as_ref().expect("derivatives requested");
    [
        assemble(l_max, &small.d, alpha, gamma, |m, _| Complex64::new(0.0, -(m as f64))),
        assemble(l_max, d1, alpha, gamma, |_, _| Complex64::new(1.0, 0.0)),
        assemble(l_max, &small.d, alpha, gamma, |_, mp| Complex64::new(0.0, -(mp as f64))),
    ]
}

/// Applies `g` to an expansion: for each radial index, the order vector of
/// degree `l` is multiplied by `D^l(g)`. This is the coefficient-space form of
/// `f -> f(g^{-1} x)`.
pub fn rotate_expansion(e: &BallExpansion, g: &Rotation) -> BallExpansion {
    let spec = e.spec().clone();
    let stack = wigner_D(spec.l_max(), g);
    let mut coeffs = e.coeffs().to_vec();
    for l in 0..=spec.l_max() {
        let w = 2 * l + 1;
        let d = stack.block(l);
        let range = spec.block_range(l);
        let src = &e.coeffs()[range.clone()];
        let dst = &mut coeffs[range];
        for (row_in, row_out) in src.chunks(w).zip(dst.chunks_mut(w)) {
            for (i, out) in row_out.iter_mut().enumerate() {
                *out = d[i * w..(i + 1) * w].iter().zip(row_in).map(|(a, b)| a * b).sum();
            }
        }
    }
    e.with_coeffs(coeffs)
}
