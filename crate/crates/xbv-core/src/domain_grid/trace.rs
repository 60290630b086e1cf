//! Restriction of grid fields to the boundary curve.

use num_complex::Complex;

use super::domain::DomainSpec;
use super::grid::GridField;
use crate::Real;

/// One boundary sample of a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample<T> {
    /// Arclength parameter.
    pub s: T,
    /// Boundary point.
    pub z: Complex<T>,
    /// Interpolated value.
    pub value: Complex<T>,
    /// Set when no node lies within `2h` and the value was extrapolated.
    pub extrapolated: bool,
}

/// Values of `field` (component 0) at the boundary samples of `domain`.
pub fn boundary_trace<T: Real>(field: &GridField<T>, domain: &DomainSpec<T>) -> Vec<TraceSample<T>> {
    trace_component(field, domain, 0)
}

/// Values of component `c` of `field` at the boundary samples of `domain`.
pub fn trace_component<T: Real>(field: &GridField<T>, domain: &DomainSpec<T>, c: usize) -> Vec<TraceSample<T>> {
    let comp: Vec<Complex<T>> = (0..field.grid.len()).map(|k| field.at(k, c)).collect();
    domain
        .boundary
        .iter()
        .map(|b| {
            let (value, extrapolated) = field.grid.interpolate(&comp, b.z);
            TraceSample { s: b.s, z: b.z, value, extrapolated }
        })
        .collect()
}
