use crate::error::{invalid, Error, Result};

/// Cubic voxel grid, x fastest. Voxel `i` along an axis sits at unit
/// coordinate `(i - n/2) / (n/2)`, so the unit ball is inscribed in the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    n: usize,
    data: Vec<f64>,
    voxel_size: f64,
}

impl Volume {
    pub fn new(n: usize, data: Vec<f64>, voxel_size: f64) -> Result<Self> {
        if n == 0 || data.len() != n * n * n {
            return Err(invalid(format!("expected {n}^3 voxels, got {}", data.len())));
        }
        if !(voxel_size.is_finite() && voxel_size > 0.0) {
            return Err(invalid("voxel size must be positive"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("volume contains non-finite values"));
        }
        Ok(Self { n, data, voxel_size })
    }

    pub fn zeros(n: usize, voxel_size: f64) -> Self {
        Self { n, data: vec![0.0; n * n * n], voxel_size }
    }

    /// Fills the grid by evaluating `f` at unit coordinates.
    pub fn from_fn(n: usize, voxel_size: f64, f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut v = Self::zeros(n, voxel_size);
        let h = n as f64 / 2.0;
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let p = [(x as f64 - h) / h, (y as f64 - h) / h, (z as f64 - h) / h];
                    v.data[x + n * (y + n * z)] = f(p);
                }
            }
        }
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n * (y + self.n * z)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.index(x, y, z)]
    }

    /// Voxel coordinate of the ball center.
    pub fn center(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// Voxels per unit of ball radius.
    pub fn half_width(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// Trilinear interpolation at a fractional voxel coordinate; samples
    /// outside the grid read as zero.
    #[inline]
    pub fn sample(&self, p: [f64; 3]) -> f64 {
        let n = self.n as isize;
        let fx = p[0].floor();
        let fy = p[1].floor();
        let fz = p[2].floor();
        let (x0, y0, z0) = (fx as isize, fy as isize, fz as isize);
        if x0 < -1 || y0 < -1 || z0 < -1 || x0 >= n || y0 >= n || z0 >= n {
            return 0.0;
        }
        let (tx, ty, tz) = (p[0] - fx, p[1] - fy, p[2] - fz);
        let at = |x: isize, y: isize, z: isize| -> f64 {
            if x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n {
                0.0
            } else {
                self.data[(x + n * (y + n * z)) as usize]
            }
        };
        let c00 = at(x0, y0, z0) * (1.0 - tx) + at(x0 + 1, y0, z0) * tx;
        let c10 = at(x0, y0 + 1, z0) * (1.0 - tx) + at(x0 + 1, y0 + 1, z0) * tx;
        let c01 = at(x0, y0, z0 + 1) * (1.0 - tx) + at(x0 + 1, y0, z0 + 1) * tx;
        let c11 = at(x0, y0 + 1, z0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1, z0 + 1) * tx;
        let c0 = c00 * (1.0 - ty) + c10 * ty;
        let c1 = c01 * (1.0 - ty) + c11 * ty;
        c0 * (1.0 - tz) + c1 * tz
    }

    pub fn dot(&self, other: &Volume) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Volume {
        Volume { n: self.n, data: self.data.iter().map(|v| v * factor).collect(), voxel_size: self.voxel_size }
    }

    /// Voxelwise `self - other`.
    pub fn difference(&self, other: &Volume) -> Result<Volume> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Volume { n: self.n, data, voxel_size: self.voxel_size })
    }

    /// Zeroes every voxel at or beyond unit radius `radius`.
    pub fn masked_to_ball(&self, radius: f64) -> Volume {
        let h = self.half_width();
        let mut out = self.clone();
        for z in 0..self.n {
            for y in 0..self.n {
                for x in 0..self.n {
                    let r2 = ((x as f64 - h).powi(2) + (y as f64 - h).powi(2) + (z as f64 - h).powi(2)) / (h * h);
                    if r2 >= radius * radius {
                        let i = out.index(x, y, z);
                        out.data[i] = 0.0;
                    }
                }
            }
        }
        out
    }

    /// Mean and variance over voxels strictly inside unit radius `radius`.
    pub fn ball_stats(&self, radius: f64) -> (f64, f64) {
        let h = self.half_width();
        let (mut s, mut s2, mut count) = (0.0, 0.0, 0usize);
        for z in 0..self.n {
            for y in 0..self.n {
                for x in 0..self.n {
                    let r2 = ((x as f64 - h).powi(2) + (y as f64 - h).powi(2) + (z as f64 - h).powi(2)) / (h * h);
                    if r2 < radius * radius {
                        let v = self.get(x, y, z);
                        s += v;
                        s2 += v * v;
                        count += 1;
                    }
                }
            }
        }
        let mean = s / count as f64;
        (mean, s2 / count as f64 - mean * mean)
    }

    pub(crate) fn check_expandable(&self) -> Result<()> {
        if self.n < 8 || self.n % 2 != 0 {
            return Err(invalid(format!("grid size {} must be even and >= 8", self.n)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trilinear_reproduces_affine_functions() {
        let v = Volume::from_fn(8, 1.0, |p| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2]);
        let h = 4.0;
        let q = [3.3, 2.7, 4.9];
        let unit = [(q[0] - h) / h, (q[1] - h) / h, (q[2] - h) / h];
        let expect = 1.0 + 2.0 * unit[0] - unit[1] + 0.5 * unit[2];
        assert!((v.sample(q) - expect).abs() < 1e-12);
        assert_eq!(v.sample([3.0, 2.0, 5.0]), v.get(3, 2, 5));
    }

    #[test]
    fn outside_reads_zero() {
        let v = Volume::from_fn(8, 1.0, |_| 1.0);
        assert_eq!(v.sample([-2.0, 3.0, 3.0]), 0.0);
        assert_eq!(v.sample([3.0, 9.5, 3.0]), 0.0);
        assert!((v.sample([-0.5, 3.0, 3.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Volume::new(2, vec![0.0; 7], 1.0).is_err());
        assert!(Volume::new(2, vec![f64::NAN; 8], 1.0).is_err());
        assert!(Volume::new(2, vec![0.0; 8], 0.0).is_err());
        assert!(Volume::zeros(6, 1.0).check_expandable().is_err());
        assert!(Volume::zeros(9, 1.0).check_expandable().is_err());
        assert!(Volume::zeros(8, 1.0).check_expandable().is_ok());
    }
}
