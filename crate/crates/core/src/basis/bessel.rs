//! Spherical Bessel functions of the first kind and their positive roots.

/// Evaluates `j_l(x)` for `x >= 0`.
///
/// Upward recurrence is used where it is stable (`x > l`); otherwise the
/// values are obtained with Miller's downward recurrence normalized against
/// `j_0` or `j_1`.
pub fn spherical_jn(l: usize, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if l == 0 {
        return sinc(x);
    }
    if x > l as f64 {
        return upward(l, x);
    }
    if x < 1e-3 {
        return small_argument_series(l, x);
    }
    miller(l, x)
}

fn upward(l: usize, x: f64) -> f64 {
    let mut prev = sinc(x);
    let mut cur = (x.sin() / x - x.cos()) / x;
    for n in 1..l {
        let next = (2 * n + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn small_argument_series(l: usize, x: f64) -> f64 {
    // x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    let mut lead = 1.0;
    for n in 1..=l {
        lead *= x / (2 * n + 1) as f64;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..8 {
        term *= -0.5 * x * x / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
    }
    lead * sum
}

fn miller(l: usize, x: f64) -> f64 {
    let start = l + 20 + (x.ceil() as usize) + (40.0 * (l as f64 + 1.0)).sqrt() as usize;
    let mut next = 0.0_f64;
    let mut cur = 1e-30_f64;
    let mut at_l = 0.0;
    let mut at_one = 0.0;
    for n in (1..=start).rev() {
        // cur holds f_n, next holds f_{n+1}; produce f_{n-1}.
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if n - 1 == l {
            at_l = cur;
        }
        if n - 1 == 1 {
            at_one = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            at_l *= 1e-250;
            at_one *= 1e-250;
        }
    }
    if l == 1 {
        at_one = at_l;
    }
    let j0 = sinc(x);
    let j1 = (x.sin() / x - x.cos()) / x;
    if j0.abs() >= j1.abs() {
        at_l * (j0 / cur)
    } else {
        at_l * (j1 / at_one)
    }
}

/// Derivative `j_l'(x)`.
pub fn spherical_jn_derivative(l: usize, x: f64) -> f64 {
    if l == 0 {
        return -spherical_jn(1, x);
    }
    if x == 0.0 {
        return if l == 1 { 1.0 / 3.0 } else { 0.0 };
    }
    spherical_jn(l - 1, x) - (l + 1) as f64 / x * spherical_jn(l, x)
}

/// Zeros of `J_{l+1/2}` are separated by at least pi, and none lies below
/// `l + 1/2`, so a scan with unit step brackets every root exactly once.
const SCAN_STEP: f64 = 1.0;

fn refine_root(l: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = spherical_jn(l, lo);
    if flo == 0.0 {
        return lo;
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        let fmid = spherical_jn(l, mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    // Newton polish; keep it only if it improves the residual.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let fx = spherical_jn(l, x);
        let step = fx / spherical_jn_derivative(l, x);
        let cand = x - step;
        if spherical_jn(l, cand).abs() < fx.abs() {
            x = cand;
        } else {
            break;
        }
    }
    x
}

/// Calls `visit` with successive positive roots of `j_l` until it returns false.
fn scan_roots(l: usize, mut visit: impl FnMut(f64) -> bool) {
    let mut a = l as f64 + 0.5;
    let mut fa = spherical_jn(l, a);
    loop {
        let b = a + SCAN_STEP;
        let fb = spherical_jn(l, b);
        if fb == 0.0 || (fa < 0.0) != (fb < 0.0) {
            let root = if fb == 0.0 { b } else { refine_root(l, a, b) };
            if !visit(root) {
                return;
            }
            if fb == 0.0 {
                // step past the exact root so it is not bracketed again
                let c = b + 1e-9;
                a = c;
                fa = spherical_jn(l, c);
                continue;
            }
        }
        a = b;
        fa = fb;
    }
}

/// The `k`-th positive root `lambda_{l,k}` of `j_l` (`k >= 1`).
pub fn bessel_zero(l: usize, k: usize) -> f64 {
    assert!(k >= 1, "root index starts at 1");
    let mut count = 0;
    let mut found = f64::NAN;
    scan_roots(l, |root| {
        count += 1;
        if count == k {
            found = root;
            false
        } else {
            true
        }
    });
    found
}

/// All positive roots of `j_l` not exceeding `limit`, in increasing order.
pub fn bessel_zeros_below(l: usize, limit: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if limit < l as f64 + 0.5 {
        return roots;
    }
    scan_roots(l, |root| {
        if root <= limit {
            roots.push(root);
            true
        } else {
            false
        }
    });
    roots
}

/// Normalization `c_{l,k}` making `c j_l(lambda r)` unit-norm on `[0,1]` with
/// weight `r^2`. Uses `int_0^1 j_l(lambda r)^2 r^2 dr = j_{l+1}(lambda)^2 / 2`.
pub fn radial_norm(l: usize, k: usize) -> f64 {
    norm_for_root(l, bessel_zero(l, k))
}

pub(crate) fn norm_for_root(l: usize, root: f64) -> f64 {
    std::f64::consts::SQRT_2 / spherical_jn(l + 1, root).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bisect_oracle(l: usize, mut lo: f64, mut hi: f64) -> f64 {
        let flo = spherical_jn(l, lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (spherical_jn(l, mid) < 0.0) == (flo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn closed_forms_low_order() {
        for &x in &[0.3f64, 1.0, 2.5, 7.0, 40.0] {
            let s = x.sin();
            let c = x.cos();
            assert!((spherical_jn(0, x) - s / x).abs() < 1e-15);
            assert!((spherical_jn(1, x) - (s / (x * x) - c / x)).abs() < 1e-14);
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            assert!((spherical_jn(2, x) - j2).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn recurrence_branches_agree() {
        // both methods are valid just above the x = l switch
        for l in [5usize, 12, 30, 42] {
            for x in [l as f64 + 0.5, l as f64 + 3.0] {
                let (a, b) = (upward(l, x), miller(l, x));
                assert!((a - b).abs() < 1e-11 * a.abs(), "l={l} x={x}");
            }
        }
    }

    #[test]
    fn small_argument_matches_miller() {
        for l in [1usize, 3, 10] {
            let x = 1.5e-3;
            let series = small_argument_series(l, x);
            let m = miller(l, x);
            assert!((series - m).abs() <= 1e-10 * series.abs(), "l={l}");
        }
    }

    #[test]
    fn zeros_of_j0_are_multiples_of_pi() {
        assert!((bessel_zero(0, 1) - PI).abs() < 1e-13);
        assert!((bessel_zero(0, 3) - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn first_zero_of_j1() {
        let oracle = bisect_oracle(1, PI, 2.0 * PI);
        assert!((oracle - 4.493_409_457_909_064).abs() < 1e-12);
        assert!((bessel_zero(1, 1) - oracle).abs() < 1e-12);
    }

    #[test]
    fn residuals_and_monotonicity() {
        for l in [0usize, 1, 7, 20, 42] {
            let roots = bessel_zeros_below(l, 110.0);
            assert!(!roots.is_empty());
            for w in roots.windows(2) {
                assert!(w[1] > w[0] + 3.0);
            }
            for &r in &roots {
                assert!(spherical_jn(l, r).abs() < 1e-12, "l={l} r={r}");
            }
        }
    }

    #[test]
    fn norm_closed_form_vs_quadrature() {
        assert!((radial_norm(0, 1) - 2f64.sqrt() * PI).abs() < 1e-9);
        for (l, k) in [(0usize, 1usize), (1, 1), (3, 2), (10, 4)] {
            let root = bessel_zero(l, k);
            let c = radial_norm(l, k);
            // composite Simpson with 10^4 intervals
            let n = 10_000;
            let h = 1.0 / n as f64;
            let f = |r: f64| (c * spherical_jn(l, root * r)).powi(2) * r * r;
            let mut s = f(0.0) + f(1.0);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = s * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-8, "l={l} k={k} got {integral}");
        }
    }
}
