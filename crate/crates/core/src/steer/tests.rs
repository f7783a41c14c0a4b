use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::basis::{expand, spherical_harmonic, synthesize, BasisSpec, Volume};
use crate::volio::rotate_and_shift;

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Single-sum closed form of `d^j_{a b}(beta)`.
fn d_oracle(j: i64, a: i64, b: i64, beta: f64) -> f64 {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pre = (factorial(j + a) * factorial(j - a) * factorial(j + b) * factorial(j - b)).sqrt();
    let mut sum = 0.0;
    for k in 0..=(2 * j) {
        if j + b - k < 0 || a - b + k < 0 || j - a - k < 0 {
            continue;
        }
        let sign = if (a - b + k) % 2 == 0 { 1.0 } else { -1.0 };
        let num = c.powi((2 * j + b - a - 2 * k) as i32) * s.powi((a - b + 2 * k) as i32);
        sum += sign * num / (factorial(j + b - k) * factorial(k) * factorial(a - b + k) * factorial(j - a - k));
    }
    pre * sum
}

#[test]
fn small_d_matches_factorial_sum() {
    for &beta in &[0.7, 0.01, 1.9, 3.1] {
        for l in 0..=10usize {
            let d = wigner_d_small(l, beta);
            let w = 2 * l + 1;
            let li = l as i64;
            for a in -li..=li {
                for b in -li..=li {
                    let got = d[(a + li) as usize * w + (b + li) as usize];
                    let want = d_oracle(li, a, b, beta);
                    assert!((got - want).abs() < 1e-10, "l={l} a={a} b={b} beta={beta}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn small_d_simple_values() {
    let d = wigner_d_small(1, PI / 3.0);
    assert!((d[4] - 0.5).abs() < 1e-15);
    let d = wigner_d_small(1, 0.4);
    // d^1_{11} = (1 + cos)/2
    assert!((d[8] - (1.0 + 0.4f64.cos()) / 2.0).abs() < 1e-15);
}

#[test]
fn identity_gives_identity_matrices() {
    let stack = wigner_D(12, &Rotation::identity());
    for l in 0..=12 {
        let w = 2 * l + 1;
        for i in 0..w {
            for j in 0..w {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((stack.block(l)[i * w + j] - expect).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn unitary_and_homomorphic_to_high_degree() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for _ in 0..3 {
        let (g1, g2) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
        let d1 = wigner_D(42, &g1);
        let d2 = wigner_D(42, &g2);
        let d12 = wigner_D(42, &g1.compose(&g2));
        assert!(d1.unitarity_error() < 1e-10, "{}", d1.unitarity_error());
        let prod = d1.compose(&d2);
        for l in 0..=42 {
            for (a, b) in prod.block(l).iter().zip(d12.block(l)) {
                assert!((a - b).norm() < 1e-9, "l={l}");
            }
        }
    }
}

#[test]
fn rotated_harmonics_expand_in_d() {
    // Y_l^m(R^-1 x) = sum_{m'} D^l_{m' m}(R) Y_l^{m'}(x)
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let l_max = 6;
    for _ in 0..5 {
        let g = Rotation::random(&mut rng);
        let stack = wigner_D(l_max, &g);
        let (theta, phi): (f64, f64) = (rng.random_range(0.1..3.0), rng.random_range(0.0..6.0));
        let x = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let y = g.inverse().apply(x);
        let (ty, py) = (y[2].clamp(-1.0, 1.0).acos(), y[1].atan2(y[0]));
        for l in 0..=l_max {
            let li = l as i32;
            for m in -li..=li {
                let lhs = spherical_harmonic(l, m, ty, py);
                let rhs: Complex64 =
                    (-li..=li).map(|mp| stack.get(l, mp, m) * spherical_harmonic(l, mp, theta, phi)).sum();
                assert!((lhs - rhs).norm() < 1e-12, "l={l} m={m}");
            }
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let (a, b, c) = (0.4, 1.2, -2.3);
    let h = 1e-5;
    let grads = wigner_D_grad_euler(10, a, b, c);
    let at = |a, b, c| wigner_D_euler(10, a, b, c);
    let fd = [
        (at(a + h, b, c), at(a - h, b, c)),
        (at(a, b + h, c), at(a, b - h, c)),
        (at(a, b, c + h), at(a, b, c - h)),
    ];
    for k in 0..3 {
        for l in 0..=10 {
            for (i, g) in grads[k].block(l).iter().enumerate() {
                let num = (fd[k].0.block(l)[i] - fd[k].1.block(l)[i]) / (2.0 * h);
                assert!((g - num).norm() < 1e-6 * (1.0 + g.norm()), "k={k} l={l}");
            }
        }
    }
}

#[test]
fn alpha_derivative_vanishes_on_zero_order_row() {
    let grads = wigner_D_grad_euler(5, 0.3, 0.9, 1.4);
    for l in 0..=5 {
        let w = 2 * l + 1;
        for j in 0..w {
            assert_eq!(grads[0].block(l)[l * w + j], Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn second_derivative_in_beta() {
    let small = WignerSmall::new(15, 1.1, true);
    let (lo, hi) = (WignerSmall::new(15, 1.1 - 1e-4, true), WignerSmall::new(15, 1.1 + 1e-4, true));
    let (d1, d2) = (small.d1.unwrap(), small.d2.unwrap());
    let (l1, h1) = (lo.d1.unwrap(), hi.d1.unwrap());
    for l in 0..=15 {
        for i in 0..d2[l].len() {
            let num = (h1[l][i] - l1[l][i]) / 2e-4;
            assert!((d2[l][i] - num).abs() < 1e-5 * (1.0 + d2[l][i].abs()), "l={l}");
            let num1 = (hi.d[l][i] - lo.d[l][i]) / 2e-4;
            assert!((d1[l][i] - num1).abs() < 1e-5 * (1.0 + d1[l][i].abs()));
        }
    }
}

fn blob_volume(n: usize) -> Volume {
    Volume::from_fn(n, 1.0, |p| {
        let g = |c: [f64; 3], s: f64| {
            let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2);
            (-r2 / (2.0 * s * s)).exp()
        };
        g([0.3, 0.1, -0.2], 0.15) + 0.7 * g([-0.25, 0.3, 0.2], 0.2) + 0.5 * g([0.0, -0.35, 0.1], 0.12)
    })
}

#[test]
fn rotation_of_expansions() {
    let spec = Arc::new(BasisSpec::build(8, 20.0).unwrap());
    let e = expand(&blob_volume(24), &spec).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let id = rotate_expansion(&e, &Rotation::identity());
    for (a, b) in id.coeffs().iter().zip(e.coeffs()) {
        assert!((a - b).norm() < 1e-13);
    }
    for _ in 0..3 {
        let (g1, g2) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
        let r = rotate_expansion(&e, &g1);
        assert!((r.norm() - e.norm()).abs() < 1e-10 * e.norm());
        let two = rotate_expansion(&rotate_expansion(&e, &g2), &g1);
        let once = rotate_expansion(&e, &g1.compose(&g2));
        for (a, b) in two.coeffs().iter().zip(once.coeffs()) {
            assert!((a - b).norm() < 1e-10 * e.norm());
        }
        // c_{-m} = (-1)^m conj(c_m) survives rotation
        for l in 0..=spec.l_max() {
            let w = 2 * l + 1;
            for row in r.block(l).chunks(w) {
                for m in 1..=l {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((row[l - m] - row[l + m].conj() * sign).norm() < 1e-10 * e.norm());
                }
            }
        }
    }
}

#[test]
fn steering_matches_voxel_rotation() {
    let n = 48;
    let spec = Arc::new(BasisSpec::build(14, 30.0).unwrap());
    let e = expand(&blob_volume(n), &spec).unwrap();
    let base = synthesize(&e, n, 1.0).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for _ in 0..5 {
        let g = Rotation::random(&mut rng);
        let steered = synthesize(&rotate_expansion(&e, &g), n, 1.0).unwrap();
        let oracle = rotate_and_shift(&base, &g, [0.0; 3]).masked_to_ball(0.9);
        let diff = steered.masked_to_ball(0.9).difference(&oracle).unwrap();
        let rel = diff.norm() / oracle.norm();
        assert!(rel < 0.02, "relative difference {rel}");
    }
}
