use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::basis::Volume;
use crate::error::{invalid, Result};

/// Binary Fourier mask of a single-axis tilt series.
///
/// The beam runs along `z` at zero tilt. A frequency `nu` is kept when
/// `|nu . beam| <= tan(theta_max) |nu . perp|`, where `perp = tilt_axis x beam`.
/// The mask is symmetric under `nu -> -nu` on the discrete grid, so filtered
/// real volumes stay real.
#[derive(Debug, Clone)]
pub struct WedgeMask {
    n: usize,
    theta_max_deg: f64,
    tilt_axis: [f64; 3],
    mask: Vec<bool>,
}

fn freq(i: usize, n: usize) -> f64 {
    if i < n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl WedgeMask {
    pub fn new(n: usize, theta_max_deg: f64, tilt_axis: [f64; 3]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("grid size must be positive"));
        }
        if !(0.0..=90.0).contains(&theta_max_deg) {
            return Err(invalid(format!("tilt range {theta_max_deg} outside [0, 90] degrees")));
        }
        let axis = normalize(tilt_axis).ok_or_else(|| invalid("tilt axis must be nonzero"))?;
        let project = |v: [f64; 3]| {
            let c = dot(v, axis);
            normalize([v[0] - c * axis[0], v[1] - c * axis[1], v[2] - c * axis[2]])
        };
        let beam = project([0.0, 0.0, 1.0]).or_else(|| project([1.0, 0.0, 0.0])).expect("axis is unit");
        let perp = cross(axis, beam);

        let tan = (theta_max_deg.to_radians()).tan();
        let keep_all = theta_max_deg >= 90.0;
        let keep = |v: [f64; 3]| {
            if keep_all || v == [0.0; 3] {
                return true;
            }
            let nb = dot(v, beam).abs();
            let np = dot(v, perp).abs();
            nb <= tan * np + 1e-9 * (nb + np)
        };
        let neg = |i: usize| (n - i) % n;
        let mut mask = vec![false; n * n * n];
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let a = [freq(x, n), freq(y, n), freq(z, n)];
                    let b = [freq(neg(x), n), freq(neg(y), n), freq(neg(z), n)];
                    mask[x + n * (y + n * z)] = keep(a) && keep(b);
                }
            }
        }
        Ok(Self { n, theta_max_deg, tilt_axis: axis, mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta_max_deg(&self) -> f64 {
        self.theta_max_deg
    }

    pub fn tilt_axis(&self) -> [f64; 3] {
        self.tilt_axis
    }

    /// Mask value at FFT index `(x, y, z)`.
    pub fn keeps(&self, x: usize, y: usize, z: usize) -> bool {
        self.mask[x + self.n * (y + self.n * z)]
    }

    pub fn values(&self) -> &[bool] {
        &self.mask
    }

    pub fn kept_fraction(&self) -> f64 {
        self.mask.iter().filter(|&&k| k).count() as f64 / self.mask.len() as f64
    }

    /// `F^-1 (M . F v)`.
    pub fn apply(&self, v: &Volume) -> Result<Volume> {
        if v.n() != self.n {
            return Err(crate::error::Error::SizeMismatch(v.n(), self.n));
        }
        let mut spec = fft3(v.data().iter().map(|&x| Complex64::new(x, 0.0)).collect(), self.n, false);
        for (c, &k) in spec.iter_mut().zip(&self.mask) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let back = fft3(spec, self.n, true);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        Volume::new(self.n, back.iter().map(|c| c.re * scale).collect(), v.voxel_size())
    }
}

/// Builds the missing-wedge mask for an `n^3` grid.
pub fn build_wedge_mask(n: usize, theta_max_deg: f64, tilt_axis: [f64; 3]) -> Result<WedgeMask> {
    WedgeMask::new(n, theta_max_deg, tilt_axis)
}

/// Applies `mask` to `v` in Fourier space.
pub fn apply_wedge(v: &Volume, mask: &WedgeMask) -> Result<Volume> {
    mask.apply(v)
}

/// Unnormalized 3D DFT of an x-fastest cube.
pub fn fft3(mut data: Vec<Complex64>, n: usize, inverse: bool) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fft: Arc<dyn Fft<f64>> = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(&mut data, &mut scratch);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for stride in [n, n * n] {
        for z in 0..n {
            for y in 0..n {
                let base = if stride == n { y + n * n * z } else { y + n * z };
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
    data
}
