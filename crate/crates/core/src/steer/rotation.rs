use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Element of SO(3), stored as a unit quaternion `(w, x, y, z)`.
///
/// Euler angles use the active ZYZ convention `R = Rz(alpha) Ry(beta) Rz(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub const fn identity() -> Self {
        Self { w: 1.0, x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Normalizes the input; a zero quaternion yields the identity.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Self::identity();
        }
        Self { w: w / n, x: x / n, y: y / n, z: z / n }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if n == 0.0 {
            return Self::identity();
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Self::from_quaternion(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    pub fn about_z(angle: f64) -> Self {
        Self::from_axis_angle([0.0, 0.0, 1.0], angle)
    }

    pub fn about_y(angle: f64) -> Self {
        Self::from_axis_angle([0.0, 1.0, 0.0], angle)
    }

    pub fn from_euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self::about_z(alpha).compose(&Self::about_y(beta)).compose(&Self::about_z(gamma))
    }

    /// `(alpha, beta, gamma)` with `beta` in `[0, pi]` and the others in
    /// `(-pi, pi]`. At the poles `gamma` is set to zero.
    pub fn to_euler_zyz(&self) -> (f64, f64, f64) {
        let r = self.matrix();
        let sb = (r[(0, 2)] * r[(0, 2)] + r[(1, 2)] * r[(1, 2)]).sqrt();
        let beta = sb.atan2(r[(2, 2)]);
        if sb > 1e-12 {
            let alpha = r[(1, 2)].atan2(r[(0, 2)]);
            let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
            (alpha, beta, gamma)
        } else if r[(2, 2)] > 0.0 {
            (r[(1, 0)].atan2(r[(0, 0)]), beta, 0.0)
        } else {
            ((-r[(1, 0)]).atan2(r[(1, 1)]), beta, 0.0)
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let (a, b) = (self, other);
        Rotation::from_quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }

    pub fn inverse(&self) -> Rotation {
        Rotation { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let r = self.matrix() * Vector3::new(v[0], v[1], v[2]);
        [r[0], r[1], r[2]]
    }

    /// Rotation angle in radians, in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }

    /// Uniformly distributed random rotation (Shoemake's method).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let u3: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        Rotation::from_quaternion(a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos())
    }
}
