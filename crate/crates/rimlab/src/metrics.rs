//! SINR scoring at anchored peak cells and empirical CDF aggregation.

use std::io::Write;
use std::path::Path;

use crate::cfar::{CfarParams, PeakSet};
use crate::error::{Result, RimError};
use crate::pipeline::RDMap;

/// Guard against a zero noise floor in the SINR ratio.
const NOISE_FLOOR_EPSILON: f64 = 1e-30;

/// Signal-to-interference-plus-noise ratio in dB.
///
/// Mean power at the peak cells over the mean power of every cell outside
/// the peaks' guard-plus-reference neighborhoods. The same `params` geometry
/// used for detection defines the exclusion zone, so all methods scored at
/// identical anchored peaks see identical noise-floor regions.
pub fn sinr(rd: &RDMap, peaks: &PeakSet, params: &CfarParams) -> Result<f64> {
    if peaks.is_empty() {
        return Err(RimError::data("SINR undefined for an empty peak set"));
    }
    let (n, m) = rd.data.dim();
    for &(r, c) in &peaks.cells {
        if r >= n || c >= m {
            return Err(RimError::shape(
                format!("peak within ({n}, {m})"),
                format!("({r}, {c})"),
            ));
        }
    }

    let wr = params.window_half_range();
    let wd = params.window_half_doppler();
    let mut excluded = ndarray::Array2::from_elem((n, m), false);
    for &(r, c) in &peaks.cells {
        let r0 = r.saturating_sub(wr);
        let r1 = (r + wr).min(n - 1);
        let c0 = c.saturating_sub(wd);
        let c1 = (c + wd).min(m - 1);
        for rr in r0..=r1 {
            for cc in c0..=c1 {
                excluded[(rr, cc)] = true;
            }
        }
    }

    let peak_power = peaks
        .cells
        .iter()
        .map(|&(r, c)| rd.data[(r, c)].norm_sqr())
        .sum::<f64>()
        / peaks.len() as f64;

    let mut floor_sum = 0.0;
    let mut floor_count = 0usize;
    for ((r, c), v) in rd.data.indexed_iter() {
        if !excluded[(r, c)] {
            floor_sum += v.norm_sqr();
            floor_count += 1;
        }
    }
    if floor_count == 0 {
        return Err(RimError::data(
            "no cells left outside peak neighborhoods for the noise floor",
        ));
    }
    let noise_floor = (floor_sum / floor_count as f64).max(NOISE_FLOOR_EPSILON);
    Ok(10.0 * (peak_power / noise_floor).log10())
}

/// Empirical cumulative distribution: sorted `(value, fraction <= value)`.
pub fn sinr_cdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(RimError::data("CDF of an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite SINR value"));
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect())
}

/// Median of a sample (mean of the middle two for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Sample variance (n - 1 denominator; 0 for singletons).
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (values.len() - 1) as f64
}

/// One scored frame/method combination.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub frame_id: usize,
    pub method: String,
    pub sinr_db: f64,
}

/// Write per-frame metric rows as `frame_id,method,sinr_db`.
pub fn write_metric_rows(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "frame_id,method,sinr_db")?;
    for row in rows {
        writeln!(f, "{},{},{:.6}", row.frame_id, row.method, row.sinr_db)?;
    }
    Ok(())
}

/// Write one CDF table as `value,cum_fraction`.
pub fn write_cdf(path: &Path, cdf: &[(f64, f64)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "value,cum_fraction")?;
    for (v, p) in cdf {
        writeln!(f, "{v:.6},{p:.6}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use num_complex::Complex64;

    fn map_with_peaks(peaks: &[(usize, usize)], peak_mag: f64, floor_mag: f64) -> RDMap {
        let mut data = Array2::from_elem((40, 40), Complex64::new(floor_mag, 0.0));
        for &(r, c) in peaks {
            data[(r, c)] = Complex64::new(peak_mag, 0.0);
        }
        RDMap { data }
    }

    #[test]
    fn direct_ratio_is_20_db() {
        let peaks = PeakSet {
            cells: vec![(20, 20)],
        };
        let rd = map_with_peaks(&peaks.cells, 10.0, 1.0);
        let v = sinr(&rd, &peaks, &CfarParams::default()).unwrap();
        assert_relative_eq!(v, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn sinr_invariant_under_complex_scaling() {
        let peaks = PeakSet {
            cells: vec![(10, 12), (25, 30)],
        };
        let rd = map_with_peaks(&peaks.cells, 50.0, 0.5);
        let params = CfarParams::default();
        let base = sinr(&rd, &peaks, &params).unwrap();
        let alpha = Complex64::new(-3.0, 4.0);
        let scaled = RDMap {
            data: rd.data.mapv(|v| v * alpha),
        };
        let rotated = sinr(&scaled, &peaks, &params).unwrap();
        assert_relative_eq!(base, rotated, epsilon = 1e-9);
    }

    #[test]
    fn empty_peak_set_is_an_error() {
        let rd = map_with_peaks(&[], 1.0, 1.0);
        assert!(sinr(&rd, &PeakSet::default(), &CfarParams::default()).is_err());
    }

    #[test]
    fn out_of_bounds_peak_is_an_error() {
        let rd = map_with_peaks(&[], 1.0, 1.0);
        let peaks = PeakSet {
            cells: vec![(100, 0)],
        };
        assert!(sinr(&rd, &peaks, &CfarParams::default()).is_err());
    }

    #[test]
    fn cdf_of_constant_sample_is_single_step() {
        let cdf = sinr_cdf(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(cdf.last().unwrap(), &(0.0, 1.0));
        assert!(cdf.iter().all(|&(v, _)| v == 0.0));
    }

    #[test]
    fn cdf_fractions_are_uniform_steps() {
        let cdf = sinr_cdf(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            cdf,
            vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]
        );
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let values: Vec<f64> = (0..250).map(|i| ((i * 37) % 101) as f64 - 50.0).collect();
        let cdf = sinr_cdf(&values).unwrap();
        assert_eq!(cdf.len(), 250);
        for w in cdf.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
        assert_relative_eq!(cdf.last().unwrap().1, 1.0);
    }

    #[test]
    fn empty_cdf_is_an_error() {
        assert!(sinr_cdf(&[]).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
