//! Two-dimensional cell-averaging CFAR detection on RD power maps.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};

/// CA-CFAR window geometry and threshold scale.
///
/// `ref_extent_*` is the total reference extent per dimension (so half of it
/// on each side of the cell); a square guard band of `guard_cells` per
/// dimension separates the cell under test from the reference cells. Near
/// map borders only in-map cells enter the reference mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfarParams {
    /// Total reference extent along range (cells).
    pub ref_extent_range: usize,
    /// Total reference extent along Doppler (cells).
    pub ref_extent_doppler: usize,
    /// Guard half-width per dimension (cells).
    pub guard_cells: usize,
    /// Linear threshold multiplier on the reference mean.
    pub scale_alpha: f64,
}

impl Default for CfarParams {
    /// 8 x 6 reference extent, 2 guard cells, 13 dB threshold.
    fn default() -> Self {
        CfarParams {
            ref_extent_range: 8,
            ref_extent_doppler: 6,
            guard_cells: 2,
            scale_alpha: 10f64.powf(1.3),
        }
    }
}

impl CfarParams {
    pub fn validate(&self) -> Result<()> {
        if self.ref_extent_range < 2 || self.ref_extent_range % 2 != 0 {
            return Err(RimError::config("range reference extent must be even and >= 2"));
        }
        if self.ref_extent_doppler < 2 || self.ref_extent_doppler % 2 != 0 {
            return Err(RimError::config(
                "Doppler reference extent must be even and >= 2",
            ));
        }
        if !(self.scale_alpha > 1.0) {
            return Err(RimError::config("CFAR alpha must exceed 1"));
        }
        Ok(())
    }

    /// Half-width of the full window (guard + reference) along range.
    pub fn window_half_range(&self) -> usize {
        self.guard_cells + self.ref_extent_range / 2
    }

    /// Half-width of the full window (guard + reference) along Doppler.
    pub fn window_half_doppler(&self) -> usize {
        self.guard_cells + self.ref_extent_doppler / 2
    }
}

/// Detected peak cells, row-major order, no duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeakSet {
    pub cells: Vec<(usize, usize)>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// True if some detected cell lies within Chebyshev distance `tol` of
    /// `(row, col)`.
    pub fn contains_near(&self, row: usize, col: usize, tol: usize) -> bool {
        self.cells.iter().any(|&(r, c)| {
            r.abs_diff(row) <= tol && c.abs_diff(col) <= tol
        })
    }
}

/// Run CA-CFAR over a non-negative power map.
///
/// A cell is detected when its power exceeds `alpha` times the mean of the
/// reference cells around it (window minus guard band minus the cell).
pub fn ca_cfar(power: &Array2<f64>, params: &CfarParams) -> Result<PeakSet> {
    params.validate()?;
    let (n, m) = power.dim();
    let wr = params.window_half_range();
    let wd = params.window_half_doppler();
    if 2 * wr + 1 > n || 2 * wd + 1 > m {
        return Err(RimError::Config(format!(
            "CFAR window {}x{} exceeds map {}x{}",
            2 * wr + 1,
            2 * wd + 1,
            n,
            m
        )));
    }
    if let Some(v) = power.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(RimError::Numeric(format!(
            "CFAR input must be finite and non-negative, found {v}"
        )));
    }

    let g = params.guard_cells as isize;
    let mut cells = Vec::new();
    for r in 0..n {
        for c in 0..m {
            let mut sum = 0.0;
            let mut count = 0usize;
            let r0 = r.saturating_sub(wr);
            let r1 = (r + wr).min(n - 1);
            let c0 = c.saturating_sub(wd);
            let c1 = (c + wd).min(m - 1);
            for rr in r0..=r1 {
                let dr = (rr as isize - r as isize).abs();
                for cc in c0..=c1 {
                    let dc = (cc as isize - c as isize).abs();
                    if dr <= g && dc <= g {
                        continue; // guard band, includes the cell itself
                    }
                    sum += power[(rr, cc)];
                    count += 1;
                }
            }
            let mean = if count > 0 { sum / count as f64 } else { 0.0 };
            if power[(r, c)] > params.scale_alpha * mean {
                cells.push((r, c));
            }
        }
    }
    Ok(PeakSet { cells })
}
