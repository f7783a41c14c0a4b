use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::quadrature::gauss_legendre;
use super::*;

fn blobs(n: usize) -> Volume {
    Volume::from_fn(n, 1.0, |p| {
        let g = |c: [f64; 3], s: f64| {
            let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2);
            (-r2 / (2.0 * s * s)).exp()
        };
        g([0.3, 0.1, -0.2], 0.15) + 0.6 * g([-0.25, 0.3, 0.2], 0.2)
    })
}

#[test]
fn zero_volume_expands_to_zero() {
    let spec = Arc::new(BasisSpec::build(6, 15.0).unwrap());
    let e = expand(&Volume::zeros(16, 1.0), &spec).unwrap();
    assert!(e.coeffs().iter().all(|c| c.norm() == 0.0));
    let v = synthesize(&BallExpansion::zeros(spec), 16, 1.0).unwrap();
    assert!(v.data().iter().all(|&x| x == 0.0));
}

#[test]
fn synthesize_matches_direct_formula() {
    let spec = Arc::new(BasisSpec::build(2, 10.0).unwrap());
    let e = BallExpansion::unit(spec, BasisIndex { k: 1, l: 0, m: 0 }).unwrap();
    let v = synthesize(&e, 16, 1.0).unwrap();
    let c = radial_norm(0, 1);
    let want = c * spherical_jn(0, PI * 0.5) / (2.0 * PI.sqrt());
    assert!((v.get(12, 8, 8) - want).abs() < 1e-12);
    assert!((v.get(8, 8, 4) - want).abs() < 1e-12);
}

#[test]
fn synthesis_vanishes_outside_ball() {
    let spec = Arc::new(BasisSpec::build(4, 12.0).unwrap());
    let e = expand(&blobs(16), &spec).unwrap();
    let v = synthesize(&e, 16, 1.0).unwrap();
    for z in 0..16 {
        for y in 0..16 {
            for x in 0..16 {
                let r2 = [x, y, z].iter().map(|&c| (c as f64 - 8.0).powi(2)).sum::<f64>();
                if r2 >= 64.0 {
                    assert_eq!(v.get(x, y, z), 0.0);
                }
            }
        }
    }
}

#[test]
fn unit_coefficients_survive_round_trip() {
    let spec = Arc::new(BasisSpec::build(4, 12.0).unwrap());
    for idx in [BasisIndex { k: 1, l: 0, m: 0 }, BasisIndex { k: 1, l: 2, m: 1 }, BasisIndex { k: 2, l: 1, m: 0 }] {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); spec.len()];
        coeffs[spec.index_of(idx).unwrap()] = Complex64::new(1.0, 0.0);
        if idx.m != 0 {
            let mirror = BasisIndex { m: -idx.m, ..idx };
            let sign = if idx.m % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[spec.index_of(mirror).unwrap()] = Complex64::new(sign, 0.0);
        }
        let e = BallExpansion::from_coeffs(spec.clone(), coeffs.clone(), true).unwrap();
        let back = expand(&synthesize(&e, 128, 1.0).unwrap(), &spec).unwrap();
        for (a, b) in back.coeffs().iter().zip(&coeffs) {
            if b.norm() > 0.0 {
                // trilinear resampling smooths by O(h^2)
                assert!((a - b).norm() < 2e-3, "{idx:?}: {a}");
            } else {
                assert!(a.norm() < 2e-4, "{idx:?}: leak {a}");
            }
        }
    }
}

#[test]
fn parseval_against_voxel_sum() {
    let n = 64;
    let v = blobs(n);
    let spec = Arc::new(BasisSpec::for_grid(16, n).unwrap());
    let e = expand(&v, &spec).unwrap();
    let h = 2.0 / n as f64;
    let riemann: f64 = v.masked_to_ball(1.0).data().iter().map(|x| x * x).sum::<f64>() * h * h * h;
    assert!((e.energy() / riemann - 1.0).abs() < 0.02, "{} vs {}", e.energy(), riemann);
}

#[test]
fn round_trip_reproduces_smooth_volume() {
    let n = 32;
    let v = blobs(n);
    let spec = Arc::new(BasisSpec::for_grid(16, n).unwrap());
    let back = synthesize(&expand(&v, &spec).unwrap(), n, 1.0).unwrap();
    let inside = v.masked_to_ball(1.0);
    let rel = back.difference(&inside).unwrap().norm() / inside.norm();
    assert!(rel < 0.05, "relative error {rel}");
}

#[test]
fn real_volumes_give_conjugate_symmetric_coefficients() {
    let spec = Arc::new(BasisSpec::build(10, 25.0).unwrap());
    let e = expand(&blobs(24), &spec).unwrap();
    assert!(e.is_real());
    for l in 0..=10 {
        let w = 2 * l + 1;
        for row in e.block(l).chunks(w) {
            assert!(row[l].im.abs() < 1e-12);
            for m in 1..=l {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((row[l - m] - row[l + m].conj() * sign).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn lowpass_properties() {
    let spec = Arc::new(BasisSpec::build(6, 15.0).unwrap());
    let e = expand(&blobs(16), &spec).unwrap();
    assert_eq!(lowpass(&e, 6).coeffs(), e.coeffs());
    let zero = lowpass(&e, 0);
    for idx in spec.indices() {
        let c = zero.coeff(idx).unwrap();
        if idx.l > 0 {
            assert_eq!(c, Complex64::new(0.0, 0.0));
        } else {
            assert_eq!(c, e.coeff(idx).unwrap());
        }
    }
    for l in 0..=6 {
        assert!(e.lowpass(l).energy() <= e.energy());
    }
}

fn psi(spec: &BasisSpec, idx: BasisIndex, r: f64, theta: f64, phi: f64) -> Complex64 {
    let radial = spec.norm(idx.l, idx.k) * spherical_jn(idx.l, spec.root(idx.l, idx.k) * r);
    spherical_harmonic(idx.l, idx.m, theta, phi) * radial
}

#[test]
fn basis_is_orthonormal_by_quadrature() {
    let spec = BasisSpec::build(8, 30.0).unwrap();
    let all: Vec<BasisIndex> = spec.indices().collect();
    let (xr, wr) = gauss_legendre(40);
    let (xt, wt) = gauss_legendre(20);
    let n_phi = 20;
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    for trial in 0..20 {
        let a = all[rng.random_range(0..all.len())];
        // every fourth pair compares an index with itself
        let b = if trial % 4 == 0 { a } else { all[rng.random_range(0..all.len())] };
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in xr.iter().zip(&wr) {
            let r = 0.5 * (x + 1.0);
            for (ct, wt) in xt.iter().zip(&wt) {
                let theta = ct.acos();
                for q in 0..n_phi {
                    let phi = 2.0 * PI * q as f64 / n_phi as f64;
                    let weight = 0.5 * w * r * r * wt * 2.0 * PI / n_phi as f64;
                    s += psi(&spec, a, r, theta, phi).conj() * psi(&spec, b, r, theta, phi) * weight;
                }
            }
        }
        let expect = if a == b { 1.0 } else { 0.0 };
        assert!((s - expect).norm() < 1e-3, "{a:?} {b:?}: {s}");
    }
}

#[test]
fn quadrature_is_exact_on_basis_functions() {
    let spec = Arc::new(BasisSpec::build(10, 40.0).unwrap());
    let plan = ExpansionPlan::new(spec.clone());
    let all: Vec<BasisIndex> = spec.indices().filter(|i| i.m >= 0).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    for _ in 0..10 {
        let idx = all[rng.random_range(0..all.len())];
        // real part of psi: (psi_m + (-1)^m psi_-m) / 2
        let e = plan
            .expand_fn(|p| {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let theta = if r > 0.0 { (p[2] / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
                psi(&spec, idx, r, theta, p[1].atan2(p[0])).re
            })
            .unwrap();
        for other in spec.indices() {
            let c = e.coeff(other).unwrap();
            let want = if other == idx && idx.m == 0 {
                1.0
            } else if other.k == idx.k && other.l == idx.l && other.m.abs() == idx.m && idx.m != 0 {
                if other.m > 0 || idx.m % 2 == 0 { 0.5 } else { -0.5 }
            } else {
                0.0
            };
            assert!((c - want).norm() < 1e-10, "{idx:?} -> {other:?}: {c}");
        }
    }
}
