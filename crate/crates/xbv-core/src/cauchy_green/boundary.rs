//! Contour operators: the boundary Cauchy transform and the Hilbert
//! conjugate operator on the circle.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::domain_grid::DomainSpec;
use crate::error::{Error, Result};
use crate::Real;

/// Minimal number of boundary samples accepted by [`op_c_boundary`].
pub const MIN_CONTOUR_SAMPLES: usize = 64;

/// Output of [`op_c_boundary`].
#[derive(Clone, Debug)]
pub struct ContourValues<T> {
    /// `Cv(z)` per evaluation point.
    pub values: Vec<Complex<T>>,
    /// Indices of evaluation points closer than two sample spacings to the boundary.
    pub flagged: Vec<usize>,
}

/// `Cv(z) = (1/2πi) ∮ v(ζ)/(ζ − z) dζ` by the trapezoid rule on the boundary samples.
///
/// `trace[k]` is the value at `domain.boundary[k]`.
pub fn op_c_boundary<T: Real>(
    domain: &DomainSpec<T>,
    trace: &[Complex<T>],
    eval: &[Complex<T>],
) -> Result<ContourValues<T>> {
    let m = domain.boundary.len();
    if m < MIN_CONTOUR_SAMPLES {
        return Err(Error::InvalidInput(format!("contour needs at least {MIN_CONTOUR_SAMPLES} samples, got {m}")));
    }
    if trace.len() != m {
        return Err(Error::InvalidInput(format!("trace has {} values for {m} samples", trace.len())));
    }
    let guard = T::c(2.0) * domain.max_boundary_spacing();
    let two_pi_i = Complex::new(T::zero(), T::TAU());
    let mut flagged = Vec::new();
    let values = eval
        .iter()
        .enumerate()
        .map(|(e, &z)| {
            if domain.boundary_distance(z) < guard {
                flagged.push(e);
            }
            let mut acc = Complex::new(T::zero(), T::zero());
            for (b, &v) in domain.boundary.iter().zip(trace) {
                acc += v * b.dz / (b.z - z);
            }
            acc / two_pi_i
        })
        .collect();
    Ok(ContourValues { values, flagged })
}

/// Harmonic conjugate of real samples on the uniform angular grid `θ_k = 2πk/M`.
///
/// Fourier coefficient `û_n` is multiplied by `−i sign(n)`; the mean and the
/// Nyquist mode are dropped, so the output has zero mean and `ℋ²u = −u + mean(u)`
/// for every `u` without a Nyquist component.
pub fn hilbert_conjugate<T: Real>(u: &[T]) -> Result<Vec<T>> {
    let m = u.len();
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidInput(format!("Hilbert conjugate needs 2^m uniform samples, got {m}")));
    }
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex<T>> = u.iter().map(|&x| Complex::new(x, T::zero())).collect();
    fwd.process(&mut buf);
    let half = m / 2;
    for (n, c) in buf.iter_mut().enumerate() {
        *c = if n == 0 || n == half {
            Complex::new(T::zero(), T::zero())
        } else if n < half {
            Complex::new(c.im, -c.re)
        } else {
            Complex::new(-c.im, c.re)
        };
    }
    inv.process(&mut buf);
    let scale = T::one() / T::n(m);
    Ok(buf.iter().map(|c| c.re * scale).collect())
}

/// [`hilbert_conjugate`] after checking that `theta` is the uniform grid `θ_0 + 2πk/M`.
pub fn hilbert_conjugate_on<T: Real>(theta: &[T], u: &[T]) -> Result<Vec<T>> {
    let m = theta.len();
    if m != u.len() || m < 2 {
        return Err(Error::InvalidInput("angle and value lengths differ".into()));
    }
    let step = T::TAU() / T::n(m);
    let tol = step * T::c(1e-6);
    for k in 1..m {
        if ((theta[k] - theta[k - 1]) - step).abs() > tol {
            return Err(Error::InvalidInput(format!("non-uniform angular grid at index {k}")));
        }
    }
    hilbert_conjugate(u)
}
