//! Exact rotation of ball-harmonics expansions through Wigner-D matrices.

pub(crate) mod recurrence;
pub mod rotation;
pub mod wigner;

pub use rotation::Rotation;
pub use wigner::{
    rotate_expansion, wigner_D, wigner_D_euler, wigner_D_grad, wigner_D_grad_euler, wigner_d_small, WignerSmall,
    WignerStack,
};

#[cfg(test)]
mod tests;
