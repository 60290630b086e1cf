//! Whitney extension of finite jets off the hyperplane `{y = 0}` with
//! mollified coefficients, one normal variable at a time.

mod extend;
mod tensor;
mod verify;

pub use extend::{
    geometric_schedule, quartic_bump, smooth_bump, whitney_extend, whitney_extend_slices, JetEntry, JetFamily,
    LayerExtension, WhitneyOptions, DEFAULT_DELTA0, DEFAULT_MOLLIFIER, DEFAULT_QUAD_POINTS,
};
pub use tensor::{central_stencil, fd_weights, multi_indices, uniform_axis, TensorField, MAX_DIM};
pub use verify::{norm_ratio, verify_jet, JetReport};
