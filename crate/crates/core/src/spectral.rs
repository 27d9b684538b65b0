//! Three-dimensional complex FFT on the periodic grid.
//!
//! Each axis is transformed line by line with `rustfft`. Lines are
//! independent, so the result is bit-identical for any rayon thread count.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::scalar::{from_usize, Real};

#[derive(Clone)]
pub struct Fft3<T: Real> {
    n: [usize; 3],
    forward: [Arc<dyn Fft<T>>; 3],
    inverse: [Arc<dyn Fft<T>>; 3],
}

impl<T: Real> std::fmt::Debug for Fft3<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(n: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = n.map(|len| planner.plan_fft(len, FftDirection::Forward));
        let inverse = n.map(|len| planner.plan_fft(len, FftDirection::Inverse));
        Self { n, forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform, in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the `1/N` normalization, in place.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
        let scale = T::one() / from_usize(self.len());
        data.par_iter_mut().for_each(|v| *v = *v * scale);
    }

    fn transform(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>; 3]) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT size");
        let [n0, n1, n2] = self.n;
        let plane = n1 * n2;

        // Axis 2: contiguous lines.
        if n2 > 1 {
            let fft = &plans[2];
            data.par_chunks_mut(plane).for_each(|p| {
                let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(p, &mut scratch);
            });
        }

        // Axis 1: transpose each (j, k) plane to (k, j), transform, transpose back.
        if n1 > 1 {
            let fft = &plans[1];
            data.par_chunks_mut(plane).for_each(|p| {
                let mut t = vec![Complex::zero(); plane];
                for j in 0..n1 {
                    for k in 0..n2 {
                        t[k * n1 + j] = p[j * n2 + k];
                    }
                }
                let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(&mut t, &mut scratch);
                for j in 0..n1 {
                    for k in 0..n2 {
                        p[j * n2 + k] = t[k * n1 + j];
                    }
                }
            });
        }

        // Axis 0: gather columns into an i-fastest buffer.
        if n0 > 1 {
            let fft = &plans[0];
            let mut cols = vec![Complex::zero(); data.len()];
            {
                let src: &[Complex<T>] = data;
                cols.par_chunks_mut(n0).enumerate().for_each(|(col, line)| {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = src[i * plane + col];
                    }
                });
            }
            cols.par_chunks_mut(n0 * n2.max(1)).for_each(|block| {
                let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(block, &mut scratch);
            });
            data.par_chunks_mut(plane).enumerate().for_each(|(i, p)| {
                for (col, v) in p.iter_mut().enumerate() {
                    *v = cols[col * n0 + i];
                }
            });
        }
    }
}

/// Signed mode number of FFT index `m` on an axis with `n` points.
#[inline]
pub fn signed_mode(m: usize, n: usize) -> isize {
    if m <= n / 2 {
        m as isize
    } else {
        m as isize - n as isize
    }
}
