//! Rotational alignment of 3D volumes in the ball-harmonics domain.
//!
//! Volumes supported on the unit ball are expanded into the eigenfunctions of
//! the Dirichlet Laplacian (`basis`). Rotations act exactly on the expansion
//! coefficients through Wigner-D matrices (`steer`), which turns the
//! rotational cross-correlation at a fixed shift into a finite sum over
//! per-degree kernels (`xcorr`). The alignment driver (`optimize`) selects a
//! few degree bands, seeds candidates on the lowest band and refines them with
//! damped Newton steps while marching up through the bands. `volio` holds MRC
//! file I/O, synthetic phantoms and accuracy metrics.

pub mod basis;
pub mod error;
pub mod optimize;
pub mod par;
pub mod steer;
pub mod volio;
pub mod xcorr;

pub use basis::{BallExpansion, BasisIndex, BasisSpec, Volume};
pub use error::{Error, Result};
pub use optimize::{align, AlignmentResult, OptimizerConfig};
pub use steer::{Rotation, WignerStack};
pub use xcorr::{WedgeMask, XiBlocks};
