//! MRC file I/O, synthetic phantoms and accuracy metrics.

pub mod metrics;
pub mod mrc;
pub mod phantom;

pub use metrics::geodesic_degrees;
pub use mrc::{read_mrc, read_mrc_header, write_mrc, MrcError, MrcHeader};
pub use phantom::{make_phantom, rotate_and_shift, GroundTruth, Phantom, PhantomSpec, GENERATOR};
