//! The alignment driver: band selection, seeding, frequency-marching Newton
//! refinement and the outer shift search.

pub mod bands;
pub mod baseline;
pub mod config;
pub mod refine;
pub mod search;
pub mod seed;

pub use bands::{band_scan, select_bands, BandRow};
pub use baseline::{baseline_evaluations, exhaustive_baseline, landscape_slice, BaselineResult, LandscapeSlice};
pub use config::{AlignmentResult, OptimizerConfig, TraceEntry};
pub use refine::{refine, search_rotation, Refined, RotationSearch};
pub use search::{align, alignment_kernel, shift_grid, Prepared};
pub use seed::{seed_candidates, SeedGrid};
