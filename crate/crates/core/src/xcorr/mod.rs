//! Rotational cross-correlation at a fixed shift, its derivatives, and the
//! missing-wedge filter.

pub mod wedge;
pub mod xi;

pub use wedge::{apply_wedge, build_wedge_mask, fft3, WedgeMask};
pub use xi::{
    energy_ratio, eval_cost_fraction, evaluate, evaluate_complex, gradient, hessian, xi_coefficients, Derivatives,
    XiBlocks, XiEvaluator, GIMBAL_MARGIN,
};
