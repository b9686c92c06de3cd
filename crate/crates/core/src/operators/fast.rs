use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cyclic convolution against a fixed sequence, via a cached spectrum.
/// Linear convolution outputs at indices below the circulant size are exact.
#[derive(Clone)]
pub(super) struct CirculantPlan {
    size: usize,
    spectrum: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantPlan").field("size", &self.size).finish()
    }
}

impl CirculantPlan {
    pub(super) fn new(seq: &[f64], min_size: usize) -> Self {
        let size = min_size.max(seq.len()).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut spectrum: Vec<Complex64> = seq.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        spectrum.resize(size, Complex64::new(0.0, 0.0));
        fwd.process(&mut spectrum);
        Self { size, spectrum, fwd, inv }
    }

    /// `(seq (*) v)` over the circulant, real part, length `size`.
    pub(super) fn convolve(&self, v: &[f64]) -> Vec<f64> {
        debug_assert!(v.len() <= self.size);
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(self.size, Complex64::new(0.0, 0.0));
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf.into_iter().map(|c| c.re * scale).collect()
    }
}
