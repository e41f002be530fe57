//! FFT plumbing shared by the grid engines: strided line access on
//! row-major arrays, spectral derivatives along one axis, and the exact
//! centered transform between the momentum axis and its conjugate axis.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::phase_space::Axis;

/// Start offsets of all 1-d lines along `axis` of a row-major array.
pub(crate) fn line_starts(shape: &[usize], axis: usize) -> (Vec<usize>, usize) {
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let n = shape[axis];
    let mut starts = Vec::with_capacity(outer * stride);
    for o in 0..outer {
        for i in 0..stride {
            starts.push(o * n * stride + i);
        }
    }
    (starts, stride)
}

/// Applies `f` to every line along `axis`. `f` receives the flat index of
/// the line's first element.
pub(crate) fn map_lines<F>(data: &mut [Complex64], shape: &[usize], axis: usize, f: F)
where
    F: Fn(usize, &mut [Complex64]) + Sync,
{
    let n = shape[axis];
    let (starts, stride) = line_starts(shape, axis);
    let src: &[Complex64] = data;
    let lines: Vec<Vec<Complex64>> = starts
        .par_iter()
        .map(|&s| {
            let mut buf: Vec<Complex64> = (0..n).map(|j| src[s + j * stride]).collect();
            f(s, &mut buf);
            buf
        })
        .collect();
    for (s, line) in starts.iter().zip(lines) {
        for (j, v) in line.into_iter().enumerate() {
            data[s + j * stride] = v;
        }
    }
}

/// Signed frequency index for FFT bin `m` of an odd-length transform.
#[inline]
fn signed_bin(m: usize, n: usize) -> i64 {
    if m <= (n - 1) / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Periodic spectral operations along one uniform axis of odd length.
#[derive(Clone)]
pub(crate) struct Spectral1d {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl Spectral1d {
    pub(crate) fn new(axis: &Axis) -> Self {
        let n = axis.count;
        let mut planner = FftPlanner::new();
        let length = n as f64 * axis.spacing;
        let wavenumbers = (0..n)
            .map(|m| 2.0 * PI * signed_bin(m, n) as f64 / length)
            .collect();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            wavenumbers,
        }
    }

    /// Multiplies the Fourier coefficients of `buf` by `mult(k)`.
    pub(crate) fn apply<M: Fn(f64) -> Complex64>(&self, buf: &mut [Complex64], mult: M) {
        debug_assert_eq!(buf.len(), self.n);
        self.fwd.process(buf);
        let norm = 1.0 / self.n as f64;
        for (v, &k) in buf.iter_mut().zip(&self.wavenumbers) {
            *v *= mult(k) * norm;
        }
        self.inv.process(buf);
    }

    pub(crate) fn derivative(&self, buf: &mut [Complex64]) {
        self.apply(buf, |k| Complex64::new(0.0, k));
    }

    /// Forward transform with `1/n` normalisation (coefficients in bin order).
    #[cfg(test)]
    pub(crate) fn analyse(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
        let norm = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= norm);
    }
}

/// The unitary map between values on the momentum axis `pi_j` and the
/// conjugate axis `zeta_k = (k - c) dzeta`:
///
/// `psi_k = (dpi / 2pi) sum_j exp(i zeta_k pi_j) q_j`,
/// `q_j = dzeta sum_k exp(-i zeta_k pi_j) psi_k`,
///
/// with `dzeta = 2pi / (n dpi)`. Both directions run through one FFT plus
/// precomputed phases; no resampling is involved.
#[derive(Clone)]
pub(crate) struct ConjugateTransform {
    n: usize,
    half: usize,
    dpi: f64,
    dzeta: f64,
    phase: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl ConjugateTransform {
    pub(crate) fn new(pi_axis: &Axis) -> Self {
        let n = pi_axis.count;
        let half = (n - 1) / 2;
        let dpi = pi_axis.spacing;
        let dzeta = 2.0 * PI / (n as f64 * dpi);
        let phase = (0..n)
            .map(|k| {
                let m = k as f64 - half as f64;
                let angle = m * dzeta * pi_axis.center - 2.0 * PI * m * half as f64 / n as f64;
                Complex64::from_polar(1.0, angle)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n,
            half,
            dpi,
            dzeta,
            phase,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// momentum values -> conjugate values, in place
    pub(crate) fn to_conjugate(&self, buf: &mut [Complex64]) {
        let n = self.n;
        self.inv.process(buf);
        let scale = self.dpi / (2.0 * PI);
        let tmp: Vec<Complex64> = (0..n)
            .map(|k| self.phase[k] * buf[(k + n - self.half) % n] * scale)
            .collect();
        buf.copy_from_slice(&tmp);
    }

    /// conjugate values -> momentum values, in place
    pub(crate) fn to_momentum(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let mut tmp = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            tmp[(k + n - self.half) % n] = self.phase[k].conj() * buf[k];
        }
        self.fwd.process(&mut tmp);
        for (b, t) in buf.iter_mut().zip(tmp) {
            *b = t * self.dzeta;
        }
    }
}
