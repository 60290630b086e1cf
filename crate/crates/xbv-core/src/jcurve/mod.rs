//! Pseudoholomorphic discs for variable structures: Picard iteration of the
//! disc equation, its residual, formal jets of curves attached along a line
//! and their Whitney extension to half-discs.

mod field;
mod jet;
mod picard;

pub use field::{to_complex, to_real, StructureField, StructureSpec, DEFAULT_DOMAIN_RADIUS};
pub use jet::{
    approx_jet, attach_half_disc, BandReport, CurveSamples, HalfDisc, HalfDiscOptions, JetCoefficients, JetOptions,
    DEFAULT_JET_STEP,
};
pub use picard::{
    disc_grid, jholo_residual, picard_disc, picard_family, DiscMap, PicardOptions, PicardReport, ResidualReport,
    DEFAULT_MAX_ITER, DEFAULT_RADIUS, DEFAULT_SPACING, DEFAULT_TOL, MAX_DILATIONS, STALL_RUN,
};
