//! Classical interference mitigation baselines: time-domain zeroing, IMAT
//! sparse reconstruction, and slow-time ramp filtering.
//!
//! Zeroing and IMAT consume the simulator's ground-truth interference mask,
//! i.e. the sample detection step is taken as ideal. Ramp filtering is
//! mask-free and operates on the range profiles after the first DFT.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};
use crate::pipeline::RangeProfileMap;
use crate::sim::IFFrame;

/// Parameters of the iterative adaptive-threshold reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImatParams {
    /// Number of threshold/reconstruct iterations.
    pub max_iters: usize,
    /// Initial threshold as a fraction of the maximum spectral magnitude.
    pub initial_fraction: f64,
    /// Per-iteration threshold decay factor.
    pub decay: f64,
}

impl Default for ImatParams {
    fn default() -> Self {
        ImatParams {
            max_iters: 10,
            initial_fraction: 0.9,
            decay: 0.75,
        }
    }
}

impl ImatParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(RimError::config("IMAT needs at least one iteration"));
        }
        if !(self.initial_fraction > 0.0 && self.initial_fraction <= 1.0) {
            return Err(RimError::config("IMAT initial fraction must be in (0, 1]"));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(RimError::config("IMAT decay must be in (0, 1)"));
        }
        Ok(())
    }
}

/// Zero out every interference-flagged sample; the returned mask is cleared.
pub fn zeroing(frame: &IFFrame) -> IFFrame {
    let mut data = frame.data.clone();
    for (v, &hit) in data.iter_mut().zip(frame.mask.iter()) {
        if hit {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    IFFrame::unmasked(data)
}

/// Reconstruct masked samples per ramp by iterative Fourier thresholding.
///
/// Each fast-time ramp starts from the zeroed signal; per iteration the
/// spectrum is thresholded at `initial_fraction * decay^k` of the current
/// maximum magnitude, transformed back, and only the masked samples are
/// overwritten. Unmasked samples always carry the original input on return.
pub fn imat(frame: &IFFrame, params: &ImatParams) -> Result<IFFrame> {
    params.validate()?;
    let (n, m) = frame.data.dim();
    let forward = FftPlanner::new().plan_fft_forward(n);
    let inverse = FftPlanner::new().plan_fft_inverse(n);
    let mut out = frame.data.clone();

    for j in 0..m {
        let masked: Vec<usize> = (0..n).filter(|&i| frame.mask[(i, j)]).collect();
        if masked.is_empty() {
            continue;
        }
        let mut estimate: Vec<Complex64> = (0..n)
            .map(|i| {
                if frame.mask[(i, j)] {
                    Complex64::new(0.0, 0.0)
                } else {
                    frame.data[(i, j)]
                }
            })
            .collect();

        let mut threshold = params.initial_fraction;
        for _ in 0..params.max_iters {
            let mut spectrum = estimate.clone();
            forward.process(&mut spectrum);
            let max_mag = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let tau = threshold * max_mag;
            for v in spectrum.iter_mut() {
                if v.norm() <= tau {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
            inverse.process(&mut spectrum);
            let scale = 1.0 / n as f64;
            for &i in &masked {
                estimate[i] = spectrum[i] * scale;
            }
            threshold *= params.decay;
        }
        for &i in &masked {
            out[(i, j)] = estimate[i];
        }
    }

    IFFrame::new(out, Array2::from_elem((n, m), false))
}

/// Clip each range bin's slow-time magnitudes to the bin's minimum while
/// preserving phase.
///
/// Object tones have near-constant magnitude across ramps whereas
/// interference bursts are sparse in slow time, so the per-bin minimum
/// tracks the undisturbed level.
pub fn ramp_filter(profiles: &RangeProfileMap) -> RangeProfileMap {
    let (n, m) = profiles.data.dim();
    let mut out = profiles.data.clone();
    for i in 0..n {
        let floor = (0..m)
            .map(|j| profiles.data[(i, j)].norm())
            .fold(f64::INFINITY, f64::min);
        for j in 0..m {
            let mag = out[(i, j)].norm();
            if mag > floor {
                out[(i, j)] *= floor / mag;
            }
        }
    }
    RangeProfileMap { data: out }
}
