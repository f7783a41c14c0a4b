//! Three-term recurrence in the degree for the Wigner small-d functions,
//! organized pair by pair: for each order pair `(m, m')` the values
//! `d^l_{m m'}(beta)` for `l = max(|m|, |m'|) .. l_max` are produced in one
//! sweep, together with their first and second derivatives in `beta` when
//! asked for.
//!
//! The sweep starts from the closed form at `l = max(|m|, |m'|)`, where the
//! factorial sum collapses to a single term `K cos(beta/2)^p sin(beta/2)^q`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Pair {
    pub m: i32,
    pub mp: i32,
    pub l0: usize,
    /// Offset of the `l = l0` entry in the coefficient arrays.
    pub start: usize,
    seed: f64,
    p: i32,
    q: i32,
}

/// Recurrence coefficients for every `(m, m', l)` with `l <= l_max`.
#[derive(Debug)]
pub(crate) struct PairTable {
    pub l_max: usize,
    /// Sorted by `l0`, so the pairs active up to degree `L` form a prefix.
    pub pairs: Vec<Pair>,
    /// `prefix[L]` = number of pairs with `l0 <= L`.
    prefix: Vec<usize>,
    coef_a: Vec<f64>,
    coef_au: Vec<f64>,
    coef_b: Vec<f64>,
    pub entries: usize,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for i in 1..=n {
        t[i] = t[i - 1] + (i as f64).ln();
    }
    t
}

impl PairTable {
    pub fn new(l_max: usize) -> Self {
        let lf = ln_factorials(4 * l_max + 2);
        let li = l_max as i32;
        let mut raw: Vec<(i32, i32, usize)> = Vec::new();
        for m in -li..=li {
            for mp in -li..=li {
                raw.push((m, mp, m.unsigned_abs().max(mp.unsigned_abs()) as usize));
            }
        }
        raw.sort_by_key(|&(m, mp, l0)| (l0, m, mp));

        let mut pairs = Vec::with_capacity(raw.len());
        let mut coef_a = Vec::new();
        let mut coef_au = Vec::new();
        let mut coef_b = Vec::new();
        for (m, mp, l0) in raw {
            let start = coef_a.len();
            let (seed, p, q) = seed_term(&lf, l0 as i32, m, mp);
            pairs.push(Pair { m, mp, l0, start, seed, p, q });
            let (a2, b2) = ((m * m) as f64, (mp * mp) as f64);
            for l in l0..=l_max {
                if l == l0 {
                    coef_a.push(0.0);
                    coef_au.push(0.0);
                    coef_b.push(0.0);
                    continue;
                }
                let lf = l as f64;
                let norm = ((lf * lf - a2) * (lf * lf - b2)).sqrt();
                let a = lf * (2.0 * lf - 1.0) / norm;
                let (u, b) = if l > 1 {
                    let j = lf - 1.0;
                    let u = (m * mp) as f64 / (j * lf);
                    let b = lf * ((j * j - a2) * (j * j - b2)).max(0.0).sqrt() / (j * norm);
                    (u, b)
                } else {
                    (0.0, 0.0)
                };
                coef_a.push(a);
                coef_au.push(a * u);
                coef_b.push(b);
            }
        }
        let mut prefix = vec![0; l_max + 1];
        for (l, slot) in prefix.iter_mut().enumerate() {
            *slot = pairs.partition_point(|p| p.l0 <= l);
        }
        let entries = coef_a.len();
        Self { l_max, pairs, prefix, coef_a, coef_au, coef_b, entries }
    }

    /// Shared table for `l_max`, built once per process.
    pub fn shared(l_max: usize) -> Arc<PairTable> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PairTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard.entry(l_max).or_insert_with(|| Arc::new(PairTable::new(l_max))).clone()
    }

    /// Pairs that contribute to degrees `<= l_cut`.
    pub fn active(&self, l_cut: usize) -> &[Pair] {
        &self.pairs[..self.prefix[l_cut.min(self.l_max)]]
    }

    /// Sweeps `d^l(beta)` for `l = l0..=l_cut`, calling `f(offset, d)` where
    /// `offset = l - l0`.
    #[inline]
    pub fn sweep(&self, pair: &Pair, l_cut: usize, angles: &HalfAngles, mut f: impl FnMut(usize, f64)) {
        let mut prev = 0.0;
        let mut cur = pair.seed * angles.pow(pair.p, pair.q);
        f(0, cur);
        for off in 1..=(l_cut - pair.l0) {
            let e = pair.start + off;
            let next = (self.coef_a[e] * angles.cos_beta - self.coef_au[e]) * cur - self.coef_b[e] * prev;
            prev = cur;
            cur = next;
            f(off, cur);
        }
    }

    /// Like [`sweep`](Self::sweep) but also yields the first and second
    /// derivatives in `beta`.
    #[inline]
    pub fn sweep2(&self, pair: &Pair, l_cut: usize, angles: &HalfAngles, mut f: impl FnMut(usize, f64, f64, f64)) {
        let (p, q, k) = (pair.p, pair.q, pair.seed);
        let (pf, qf) = (p as f64, q as f64);
        let d = k * angles.pow(p, q);
        let d1 = k * (0.5 * qf * angles.pow_c(qf, p + 1, q - 1) - 0.5 * pf * angles.pow_c(pf, p - 1, q + 1));
        let d2 = k
            * (0.5 * qf * (0.5 * (qf - 1.0) * angles.pow_c(qf * (qf - 1.0), p + 2, q - 2)
                - 0.5 * (pf + 1.0) * angles.pow_c(qf, p, q))
                - 0.5 * pf * (0.5 * (qf + 1.0) * angles.pow_c(pf, p, q)
                    - 0.5 * (pf - 1.0) * angles.pow_c(pf * (pf - 1.0), p - 2, q + 2)));
        let (mut v0, mut v1, mut v2) = (0.0, 0.0, 0.0);
        let (mut c0, mut c1, mut c2) = (d, d1, d2);
        f(0, c0, c1, c2);
        let (cb, sb) = (angles.cos_beta, angles.sin_beta);
        for off in 1..=(l_cut - pair.l0) {
            let e = pair.start + off;
            let a = self.coef_a[e];
            let lin = a * cb - self.coef_au[e];
            let b = self.coef_b[e];
            let n0 = lin * c0 - b * v0;
            let n1 = lin * c1 - a * sb * c0 - b * v1;
            let n2 = lin * c2 - 2.0 * a * sb * c1 - a * cb * c0 - b * v2;
            v0 = c0;
            v1 = c1;
            v2 = c2;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            f(off, c0, c1, c2);
        }
    }
}

/// `cos`/`sin` of `beta`, with power tables of `cos(beta/2)` and `sin(beta/2)`.
#[derive(Debug, Clone)]
pub(crate) struct HalfAngles {
    pub cos_beta: f64,
    pub sin_beta: f64,
    cpow: Vec<f64>,
    spow: Vec<f64>,
}

impl HalfAngles {
    /// Tables cover every exponent the seeds of degree `<= l_max` need.
    pub fn new(beta: f64, l_max: usize) -> Self {
        let (s, c) = (0.5 * beta).sin_cos();
        let n = 2 * l_max + 3;
        let table = |x: f64| {
            let mut t = Vec::with_capacity(n);
            let mut v = 1.0;
            for _ in 0..n {
                t.push(v);
                v *= x;
            }
            t
        };
        Self { cos_beta: beta.cos(), sin_beta: beta.sin(), cpow: table(c), spow: table(s) }
    }

    #[inline]
    fn pow(&self, p: i32, q: i32) -> f64 {
        self.cpow[p as usize] * self.spow[q as usize]
    }

    /// `c^p s^q`, or zero when the prefactor `coef` vanishes (which is
    /// exactly when an exponent would go negative).
    #[inline]
    fn pow_c(&self, coef: f64, p: i32, q: i32) -> f64 {
        if coef == 0.0 {
            0.0
        } else {
            self.pow(p, q)
        }
    }
}

/// Closed form at `j = max(|m|, |m'|)`: the factorial sum has one term.
fn seed_term(lf: &[f64], j: i32, m: i32, mp: i32) -> (f64, i32, i32) {
    let s = 0.max(mp - m);
    debug_assert!(s <= (j + mp).min(j - m));
    let f = |n: i32| lf[n as usize];
    let ln_mag = 0.5 * (f(j + m) + f(j - m) + f(j + mp) + f(j - mp)) - f(j + mp - s) - f(s) - f(m - mp + s) - f(j - m - s);
    let sign = if (m - mp + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (sign * ln_mag.exp(), 2 * j + mp - m - 2 * s, m - mp + 2 * s)
}
