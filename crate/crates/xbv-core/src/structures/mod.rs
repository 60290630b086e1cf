//! Linear complex structures from `(0,1)` vector fields, operator norms,
//! side certificates for a hyperplane, a structure family joining `J_st` to
//! `-J_st`, and normalization of variable coefficient fields.
//!
//! Dense linear algebra here runs in `f64`.

mod certificate;
mod example;
mod linear;

pub use certificate::{
    find_side_certificate, sphere_points, CertificateStatus, Hyperplane, SideCertificate, ASCENT_STEPS,
    CERTIFICATE_THRESHOLD, SEARCH_SEED,
};
pub use example::{example_coordinates, example_family, standard_form, ExampleStructure, NormalizedField};
pub use linear::{
    ab_to_fields, complex_norm, fields_to_ab, j_from_ab, j_from_fields, j_standard, normalize, operator_norm,
    push_forward, square_residual, CMat, CVec, LinearStructure, RMat, POWER_ITERATIONS, POWER_TOL, SINGULAR_TOL,
};
