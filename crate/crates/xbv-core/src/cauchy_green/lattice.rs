//! Circular FFT evaluation of lattice offset sums.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Real;

/// Evaluates `out[t] = Σ_s f[s] K[s − t]` on an `nx × ny` lattice for a
/// fixed offset table `K` of size `(2nx − 1) × (2ny − 1)`.
///
/// The sum is a circular convolution on a padded `lx × ly` torus with
/// `lx ≥ 2nx − 1` and `ly ≥ 2ny − 1`, so no offsets alias.
pub(crate) struct LatticeConvolution<T: Real> {
    nx: usize,
    ny: usize,
    lx: usize,
    ly: usize,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
}

impl<T: Real> LatticeConvolution<T> {
    pub(crate) fn new(nx: usize, ny: usize) -> Self {
        let lx = (2 * nx - 1).next_power_of_two();
        let ly = (2 * ny - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            lx,
            ly,
            row_fwd: planner.plan_fft_forward(lx),
            row_inv: planner.plan_fft_inverse(lx),
            col_fwd: planner.plan_fft_forward(ly),
            col_inv: planner.plan_fft_inverse(ly),
        }
    }

    /// Spectrum of the offset table `table[row * (2nx − 1) + col]`, where
    /// `col = ei + nx − 1` and `row = ej + ny − 1` for offset `e = s − t`.
    pub(crate) fn kernel_spectrum(&self, table: &[Complex<T>]) -> Vec<Complex<T>> {
        let width = 2 * self.nx - 1;
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; self.lx * self.ly];
        for row in 0..2 * self.ny - 1 {
            let ej = row as i64 - (self.ny as i64 - 1);
            // The convolution kernel at displacement t − s is K[s − t].
            let y = (-ej).rem_euclid(self.ly as i64) as usize;
            for col in 0..width {
                let ei = col as i64 - (self.nx as i64 - 1);
                let x = (-ei).rem_euclid(self.lx as i64) as usize;
                buf[y * self.lx + x] = table[row * width + col];
            }
        }
        self.forward(buf)
    }

    /// Spectrum of lattice data `f[j * nx + i]`; cells outside the data are zero.
    pub(crate) fn data_spectrum(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; self.lx * self.ly];
        for j in 0..self.ny {
            buf[j * self.lx..j * self.lx + self.nx].copy_from_slice(&f[j * self.nx..(j + 1) * self.nx]);
        }
        self.forward(buf)
    }

    /// Multiplies two spectra and returns the lattice part of the inverse transform.
    pub(crate) fn apply(&self, data: &[Complex<T>], kernel: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = data.iter().zip(kernel).map(|(a, b)| a * b).collect();
        // Columns are stored transposed after the forward pass.
        self.col_inv.process(&mut buf);
        let mut rows = transpose(&buf, self.ly, self.lx);
        self.row_inv.process(&mut rows);
        let scale = T::one() / T::n(self.lx * self.ly);
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            out.extend(rows[j * self.lx..j * self.lx + self.nx].iter().map(|v| v * scale));
        }
        out
    }

    fn forward(&self, mut buf: Vec<Complex<T>>) -> Vec<Complex<T>> {
        self.row_fwd.process(&mut buf);
        let mut cols = transpose(&buf, self.lx, self.ly);
        self.col_fwd.process(&mut cols);
        cols
    }
}

/// Transposes a row-major buffer of `height` rows with `width` entries each.
fn transpose<T: Copy>(buf: &[T], width: usize, height: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(buf.len());
    for x in 0..width {
        for y in 0..height {
            out.push(buf[y * width + x]);
        }
    }
    out
}
