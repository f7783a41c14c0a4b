//! Seeded synthetic phantoms with known rotation and shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::Volume;
use crate::error::{invalid, Result};
use crate::steer::Rotation;
use crate::xcorr::WedgeMask;

/// Name of the pseudo-random generator behind every phantom.
pub const GENERATOR: &str = "chacha20";

/// Blob widths are drawn from this range, in unit-ball coordinates.
pub const SIGMA_RANGE: (f64, f64) = (0.05, 0.10);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub n: usize,
    pub blobs: usize,
    pub support_radius: f64,
    pub seed: u64,
    pub snr: Option<f64>,
    pub wedge_theta: Option<f64>,
    #[serde(default = "default_tilt_axis")]
    pub tilt_axis: [f64; 3],
    pub true_rotation: Option<Rotation>,
    pub true_shift: Option<[i32; 3]>,
    #[serde(default = "default_voxel_size")]
    pub voxel_size: f64,
}

fn default_tilt_axis() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

fn default_voxel_size() -> f64 {
    1.0
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            n: 64,
            blobs: 8,
            support_radius: 0.8,
            seed: 0,
            snr: None,
            wedge_theta: None,
            tilt_axis: default_tilt_axis(),
            true_rotation: None,
            true_shift: None,
            voxel_size: default_voxel_size(),
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || self.n % 2 != 0 {
            return Err(invalid(format!("grid size {} must be even and >= 8", self.n)));
        }
        if self.blobs == 0 {
            return Err(invalid("need at least one blob"));
        }
        let min_support = 3.0 * SIGMA_RANGE.1;
        if !(self.support_radius > min_support && self.support_radius < 1.0) {
            return Err(invalid(format!("support radius must lie in ({min_support}, 1)")));
        }
        if let Some(snr) = self.snr {
            if !(snr.is_finite() && snr > 0.0) {
                return Err(invalid("snr must be positive"));
            }
        }
        if let Some(t) = self.wedge_theta {
            if !(0.0..=90.0).contains(&t) {
                return Err(invalid("wedge angle must lie in [0, 90] degrees"));
            }
        }
        if !(self.voxel_size.is_finite() && self.voxel_size > 0.0) {
            return Err(invalid("voxel size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Rotation applied to the template to make the subtomogram.
    pub rotation: Rotation,
    /// Integer voxel offset of the rotated template inside the subtomogram.
    pub shift: [i32; 3],
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub template: Volume,
    pub subtomogram: Volume,
    /// Subtomogram before wedge filtering and noise.
    pub clean: Volume,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, Copy)]
struct Blob {
    center: [f64; 3],
    axes: Rotation,
    inv_sigma: [f64; 3],
    amplitude: f64,
}

impl Blob {
    fn value(&self, p: [f64; 3]) -> f64 {
        let d = [p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]];
        let u = self.axes.inverse().apply(d);
        let q: f64 = (0..3).map(|i| (u[i] * self.inv_sigma[i]).powi(2)).sum();
        self.amplitude * (-0.5 * q).exp()
    }
}

fn draw_blobs(spec: &PhantomSpec, rng: &mut ChaCha20Rng) -> Vec<Blob> {
    let reach = spec.support_radius - 3.0 * SIGMA_RANGE.1;
    (0..spec.blobs)
        .map(|_| {
            let center = loop {
                let c: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if c.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    break [c[0] * reach, c[1] * reach, c[2] * reach];
                }
            };
            let axes = Rotation::random(rng);
            let inv_sigma = [0; 3].map(|_| 1.0 / rng.random_range(SIGMA_RANGE.0..=SIGMA_RANGE.1));
            let amplitude = rng.random_range(0.5..=1.0);
            Blob { center, axes, inv_sigma, amplitude }
        })
        .collect()
}

/// `x -> v(g^-1 (x - c - shift) + c)` by trilinear interpolation, with `c`
/// the grid center and `shift` in voxels.
pub fn rotate_and_shift(v: &Volume, g: &Rotation, shift: [f64; 3]) -> Volume {
    let n = v.n();
    let c = v.center();
    let inv = g.inverse();
    let mut out = Volume::zeros(n, v.voxel_size());
    crate::par::for_each_chunk_mut(out.data_mut(), n * n, |z, slab| {
        for y in 0..n {
            for x in 0..n {
                let d = [x as f64 - c - shift[0], y as f64 - c - shift[1], z as f64 - c - shift[2]];
                let s = inv.apply(d);
                slab[x + n * y] = v.sample([s[0] + c, s[1] + c, s[2] + c]);
            }
        }
    });
    out
}

/// Builds the template, the corrupted subtomogram and the ground truth.
pub fn make_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let blobs = draw_blobs(spec, &mut rng);
    let rotation = match spec.true_rotation {
        Some(g) => g,
        None => Rotation::random(&mut rng),
    };
    let shift = spec.true_shift.unwrap_or([0; 3]);

    let template = Volume::from_fn(spec.n, spec.voxel_size, |p| blobs.iter().map(|b| b.value(p)).sum());
    let clean = rotate_and_shift(&template, &rotation, shift.map(f64::from));

    let mut subtomogram = match spec.wedge_theta {
        Some(theta) => WedgeMask::new(spec.n, theta, spec.tilt_axis)?.apply(&clean)?,
        None => clean.clone(),
    };
    if let Some(snr) = spec.snr {
        let (_, signal_var) = subtomogram.ball_stats(spec.support_radius);
        if signal_var <= 0.0 {
            return Err(crate::Error::Degenerate("phantom has no signal inside the support"));
        }
        let noise = Normal::new(0.0, (signal_var / snr).sqrt()).map_err(|e| invalid(e.to_string()))?;
        for x in subtomogram.data_mut() {
            *x += noise.sample(&mut rng);
        }
    }
    Ok(Phantom { template, subtomogram, clean, truth: GroundTruth { rotation, shift } })
}
