//! Orthonormal complex spherical harmonics (Condon-Shortley phase).

use num_complex::Complex64;
use std::f64::consts::PI;

/// Index of `(l, m)` with `0 <= m <= l` in a triangular table.
#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalized associated Legendre values `p(l, m)` for `0 <= m <= l <= l_max`,
/// scaled so that `Y_l^m(theta, phi) = p(l, m) * exp(i m phi)`. The
/// Condon-Shortley phase is included.
pub fn legendre_table(l_max: usize, cos_theta: f64, sin_theta: f64) -> Vec<f64> {
    let mut p = vec![0.0; tri_index(l_max, l_max) + 1];
    legendre_table_into(l_max, cos_theta, sin_theta, &mut p);
    p
}

pub(crate) fn legendre_table_into(l_max: usize, x: f64, s: f64, p: &mut [f64]) {
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        p[tri_index(m, m)] = pmm;
        if m == l_max {
            break;
        }
        let mut prev2 = pmm;
        let mut prev1 = ((2 * m + 3) as f64).sqrt() * x * pmm;
        p[tri_index(m + 1, m)] = prev1;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let cur = a * (x * prev1 - b * prev2);
            p[tri_index(l, m)] = cur;
            prev2 = prev1;
            prev1 = cur;
        }
    }
}

/// `Y_l^m(theta, phi)` for `|m| <= l`.
pub fn spherical_harmonic(l: usize, m: i32, theta: f64, phi: f64) -> Complex64 {
    assert!(m.unsigned_abs() as usize <= l, "|m| must not exceed l");
    let table = legendre_table(l, theta.cos(), theta.sin());
    let ma = m.unsigned_abs() as usize;
    let y = table[tri_index(l, ma)] * Complex64::from_polar(1.0, ma as f64 * phi);
    if m < 0 {
        let sign = if ma % 2 == 0 { 1.0 } else { -1.0 };
        y.conj() * sign
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::quadrature::gauss_legendre;

    #[test]
    fn low_degree_values() {
        let y00 = spherical_harmonic(0, 0, 0.4, 1.1);
        assert!((y00.re - 0.282_094_791_8).abs() < 1e-10 && y00.im == 0.0);
        let y10 = spherical_harmonic(1, 0, 0.0, 0.3);
        assert!((y10.re - 0.488_602_511_9).abs() < 1e-10);
        let (t, p) = (0.7, 2.1);
        let y11 = spherical_harmonic(1, 1, t, p);
        let expect = -(3.0 / (8.0 * PI)).sqrt() * t.sin() * Complex64::from_polar(1.0, p);
        assert!((y11 - expect).norm() < 1e-14);
        let y1m1 = spherical_harmonic(1, -1, t, p);
        assert!((y1m1 + y11.conj()).norm() < 1e-15);
    }

    #[test]
    fn orthonormal_on_the_sphere() {
        let l_max = 12;
        let (x, w) = gauss_legendre(l_max + 2);
        let nphi = 2 * l_max + 2;
        let idx: Vec<(usize, i32)> = (0..=l_max)
            .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m)))
            .collect();
        for &(l1, m1) in idx.iter().step_by(7) {
            for &(l2, m2) in idx.iter().step_by(5) {
                let mut s = Complex64::new(0.0, 0.0);
                for (xi, wi) in x.iter().zip(&w) {
                    let th = xi.acos();
                    for q in 0..nphi {
                        let ph = 2.0 * PI * q as f64 / nphi as f64;
                        s += spherical_harmonic(l1, m1, th, ph).conj()
                            * spherical_harmonic(l2, m2, th, ph)
                            * (wi * 2.0 * PI / nphi as f64);
                    }
                }
                let expect = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
                assert!((s.re - expect).abs() < 1e-12 && s.im.abs() < 1e-12);
            }
        }
    }
}
