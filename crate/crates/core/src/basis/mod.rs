//! Ball-harmonics basis: `psi_{k,l,m}(r, theta, phi) = c_{lk} j_l(lambda_{lk} r) Y_l^m(theta, phi)`
//! on the unit ball, plus projection of voxel volumes onto it and evaluation
//! back onto a grid.

pub mod bessel;
pub mod expansion;
pub mod harmonics;
pub mod quadrature;
pub mod spec;
pub mod volume;

pub use bessel::{bessel_zero, radial_norm, spherical_jn};
pub use expansion::{expand, lowpass, synthesize, BallExpansion, ExpansionPlan};
pub use harmonics::spherical_harmonic;
pub use spec::{BasisIndex, BasisSpec};
pub use volume::Volume;

#[cfg(test)]
mod tests;
