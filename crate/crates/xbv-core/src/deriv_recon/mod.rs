//! Partial derivatives recovered from one-dimensional derivatives: direction
//! sets spanning the monomials, the chain rule along curves, and
//! reconstruction along curve families.

mod curves;
mod directions;
mod reconstruct;

pub use curves::{
    chain_coefficients, chain_terms, curve_derivative_expand, stencil_len, stencil_weights, CurveExpansion, LowerTerm,
    SampledCurve,
};
pub use directions::{
    build_direction_set, degree_indices, monomial, perturb_coefficients, CoefficientTable, DirectionSet,
    PerturbedTable, IDENTITY_SAMPLES, IDENTITY_SEED, IDENTITY_TOL, MAX_CONDITION,
};
pub use reconstruct::{
    affine_family_reconstruct, reconstruct_from_data, reconstruct_partials, AffineFamily, AffineReconstruction,
    CurveDatum, CurveFamily, Partials, ReconstructOptions, BASE_TOL, BLOWUP_THRESHOLD, DEFAULT_CURVE_STEP,
    DEFAULT_DELTA,
};
