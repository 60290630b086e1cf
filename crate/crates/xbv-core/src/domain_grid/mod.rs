//! Discretized planar domains, complex grid fields, Wirtinger finite
//! differences, Hölder norm estimates and boundary traces.

mod domain;
mod grid;
mod holder;
mod trace;
mod wirtinger;

pub use domain::{BoundarySample, DomainKind, DomainSpec, DEFAULT_BOUNDARY_SAMPLES};
pub use grid::{build_grid, Grid, GridField, IrregularNode, RowRun, SUBSAMPLES};
pub use holder::{
    derivative_levels, holder_estimate, holder_estimate_with, HolderReport, PairSet, FAR_PAIRS, NEAR_PAIR_RADIUS,
    PAIR_SEED,
};
pub use trace::{boundary_trace, trace_component, TraceSample};
pub use wirtinger::{partials, wirtinger, Wirtinger};
