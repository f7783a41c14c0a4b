use crate::steer::Rotation;

/// Angle of `g1^-1 g2` in degrees, in `[0, 180]`.
pub fn geodesic_degrees(g1: &Rotation, g2: &Rotation) -> f64 {
    g1.inverse().compose(g2).angle().to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn trace_formula(g1: &Rotation, g2: &Rotation) -> f64 {
        let t = (g1.matrix().transpose() * g2.matrix()).trace();
        ((t - 1.0) / 2.0).clamp(-1.0, 1.0).acos().to_degrees()
    }

    #[test]
    fn basic_values() {
        let g = Rotation::from_euler_zyz(0.3, 1.1, -2.0);
        assert_eq!(geodesic_degrees(&g, &g), 0.0);
        let d = geodesic_degrees(&Rotation::identity(), &Rotation::about_z(30f64.to_radians()));
        assert!((d - 30.0).abs() < 1e-12);
        let d = geodesic_degrees(&Rotation::identity(), &Rotation::about_y(std::f64::consts::PI));
        assert!((d - 180.0).abs() < 1e-12);
    }

    #[test]
    fn matches_trace_formula_and_is_symmetric() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (a, b) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
            let d = geodesic_degrees(&a, &b);
            assert!((d - trace_formula(&a, &b)).abs() < 1e-6);
            assert!((d - geodesic_degrees(&b, &a)).abs() < 1e-12);
        }
    }
}
