//! Per-axis FFTs on row-major `m^axes` arrays.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Lines gathered per batch when an axis is not contiguous.
const BATCH: usize = 64;

#[derive(Clone)]
pub(crate) struct AxisFft {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl AxisFft {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        AxisFft { m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    /// Runs `f` on every line along `axis`, in batches of contiguous lines.
    fn for_lines<F>(&self, data: &mut [Complex64], axes: usize, axis: usize, mut f: F)
    where
        F: FnMut(&mut [Complex64]),
    {
        let m = self.m;
        let stride = m.pow((axes - 1 - axis) as u32);
        if stride == 1 {
            f(data);
            return;
        }
        let block = m * stride;
        let mut buf = vec![Complex64::new(0.0, 0.0); m * BATCH.min(stride)];
        for outer in data.chunks_mut(block) {
            let mut i0 = 0;
            while i0 < stride {
                let lines = BATCH.min(stride - i0);
                for l in 0..lines {
                    for j in 0..m {
                        buf[l * m + j] = outer[j * stride + i0 + l];
                    }
                }
                f(&mut buf[..lines * m]);
                for l in 0..lines {
                    for j in 0..m {
                        outer[j * stride + i0 + l] = buf[l * m + j];
                    }
                }
                i0 += lines;
            }
        }
    }

    /// Unnormalized forward transform along one axis.
    pub fn forward(&self, data: &mut [Complex64], axes: usize, axis: usize) {
        let fwd = self.fwd.clone();
        self.for_lines(data, axes, axis, |lines| fwd.process(lines));
    }

    /// Inverse transform along one axis, divided by `m`.
    pub fn inverse(&self, data: &mut [Complex64], axes: usize, axis: usize) {
        let inv = self.inv.clone();
        let s = 1.0 / self.m as f64;
        self.for_lines(data, axes, axis, |lines| {
            inv.process(lines);
            lines.iter_mut().for_each(|z| *z *= s);
        });
    }

    /// Applies the Fourier multiplier `mult` (FFT order) along one axis.
    pub fn multiply(&self, data: &mut [Complex64], axes: usize, axis: usize, mult: &[Complex64]) {
        let (fwd, inv, m) = (self.fwd.clone(), self.inv.clone(), self.m);
        let s = 1.0 / m as f64;
        self.for_lines(data, axes, axis, |lines| {
            fwd.process(lines);
            for line in lines.chunks_mut(m) {
                for (z, w) in line.iter_mut().zip(mult) {
                    *z *= w * s;
                }
            }
            inv.process(lines);
        });
    }
}
