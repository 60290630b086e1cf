//! End-to-end experiments: glued Beltrami instances and the decay of their
//! boundary traces, the single-layer control and the structure sweep.

pub mod decay;
pub mod instance;
pub mod layer;
pub mod run;

pub use decay::{
    fit_decay, fourier_trace_decay, segment_rows, windowed_transform, DecayFit, DecayOptions, DecayReport,
    SegmentRows, Window, WindowKind, ENVELOPE_SAMPLES, ETA_MAX, MIN_R2, PATH_TOL, TRACE_ROWS,
};
pub use instance::{make_two_sided_instance, InstanceSpec, PhiSpec, SeedSpec, Side, TwoSidedInstance, FIX_TOL, SEGMENT_CHECKS};
pub use layer::{exterior_normal_derivative, normal_jump_check, single_layer, JumpReport, SingleLayer, LAPLACE_MARGIN, NORMAL_OFFSETS};
pub use run::{
    oracle_transform, run_experiment, Assertion, DecayConfig, DensityKind, ExperimentConfig, ExperimentKind,
    ExperimentReport, Format, GridConfig, HarmonicConfig, InstanceConfig, ReportConfig, SweepConfig, Table,
    E1_MAX_DISAGREEMENT, E1_MIN_EXPONENT, E2_MAX_EXPONENT, JUMP_TOL, LAPLACE_TOL, NORM_TOL, ORACLE_TOL, PATH_XI_MAX, RESIDUAL_FACTOR,
    RESOLVE_TOL, SWEEP_DENSITY,
};
