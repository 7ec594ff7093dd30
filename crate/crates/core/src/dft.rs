//! Thin wrapper over `rustfft` fixing the transform conventions used by the
//! whole crate.
//!
//! `forward` applies the kernel e^{-j2πnq/N}, `inverse` applies e^{+j2πnq/N};
//! neither is normalised. All scaling factors are written out explicitly at
//! the call sites so they can be checked against the closed-form expressions.

use crate::C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Cached forward/inverse plans for one transform size.
#[derive(Clone)]
pub struct DftPlan {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftPlan").field("len", &self.len).finish()
    }
}

impl DftPlan {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unscaled forward DFT: x[q] ← Σ_n x[n] e^{-j2πnq/N}.
    pub fn forward(&self, x: &mut [C64]) {
        debug_assert_eq!(x.len(), self.len);
        self.fwd.process(x);
    }

    /// In-place unscaled inverse DFT: x[n] ← Σ_q x[q] e^{+j2πnq/N}.
    pub fn inverse(&self, x: &mut [C64]) {
        debug_assert_eq!(x.len(), self.len);
        self.inv.process(x);
    }
}

/// One-shot unscaled forward DFT of a slice.
pub fn dft_forward(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    DftPlan::new(x.len()).forward(&mut buf);
    buf
}

/// One-shot unscaled inverse DFT of a slice.
pub fn dft_inverse(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    DftPlan::new(x.len()).inverse(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_kernel_sign() {
        // x[n] = e^{+j2πn/N} concentrates on bin 1 under our forward kernel.
        let n = 8;
        let x: Vec<C64> = (0..n)
            .map(|i| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        let spec = dft_forward(&x);
        assert!((spec[1].re - n as f64).abs() < 1e-10);
        for (q, v) in spec.iter().enumerate() {
            if q != 1 {
                assert!(v.norm() < 1e-10, "leakage at bin {q}: {v}");
            }
        }
    }

    #[test]
    fn inverse_is_unscaled_adjoint() {
        let x: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut y = dft_forward(&x);
        DftPlan::new(16).inverse(&mut y);
        for (a, b) in x.iter().zip(y.iter()) {
            assert!((a * 16.0 - b).norm() < 1e-9);
        }
    }
}
