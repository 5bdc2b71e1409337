//! IF frame to range-Doppler map: windowed DFT over fast time, then over
//! slow time with a centered Doppler axis, plus the two-channel real view
//! used by the denoising network.
//!
//! Conventions: unnormalized forward DFTs, periodic Hann window
//! `w[n] = 0.5 (1 - cos(2 pi n / N))` without amplitude renormalization, and
//! an fftshifted Doppler axis so zero velocity sits at bin M/2. The range
//! axis is left one-sided.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, RimError};
use crate::sim::IFFrame;

/// Floor added to magnitudes before taking logs.
pub const DB_EPSILON: f64 = 1e-12;

/// Range profiles S_R: DFT over fast time, one column per ramp.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfileMap {
    pub data: Array2<Complex64>,
}

/// Range-Doppler map S_RD with the Doppler axis center-shifted.
#[derive(Debug, Clone, PartialEq)]
pub struct RDMap {
    pub data: Array2<Complex64>,
}

impl RDMap {
    /// Per-cell power |S|^2.
    pub fn power(&self) -> Array2<f64> {
        self.data.mapv(|v| v.norm_sqr())
    }

    /// Largest magnitude over the map.
    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / n as f64).cos()))
        .collect()
}

/// Windowed unnormalized DFT over fast time, per ramp.
pub fn range_dft(frame: &Array2<Complex64>) -> RangeProfileMap {
    let (n, m) = frame.dim();
    let window = hann_window(n);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = Array2::<Complex64>::zeros((n, m));
    let mut buf = vec![Complex64::default(); n];
    for j in 0..m {
        for i in 0..n {
            buf[i] = frame[(i, j)] * window[i];
        }
        fft.process(&mut buf);
        for i in 0..n {
            out[(i, j)] = buf[i];
        }
    }
    RangeProfileMap { data: out }
}

/// Windowed unnormalized DFT over slow time, per range bin, followed by a
/// center shift that puts zero Doppler at bin M/2.
pub fn doppler_dft(profiles: &RangeProfileMap) -> RDMap {
    let (n, m) = profiles.data.dim();
    let window = hann_window(m);
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut out = Array2::<Complex64>::zeros((n, m));
    let mut buf = vec![Complex64::default(); m];
    let half = m / 2;
    for i in 0..n {
        for j in 0..m {
            buf[j] = profiles.data[(i, j)] * window[j];
        }
        fft.process(&mut buf);
        for j in 0..m {
            out[(i, j)] = buf[(j + half) % m];
        }
    }
    RDMap { data: out }
}

/// Full chain from IF frame to RD map.
pub fn rd_map(frame: &IFFrame) -> RDMap {
    doppler_dft(&range_dft(&frame.data))
}

/// Split a complex map into a (2, N, M) real tensor: channel 0 real part,
/// channel 1 imaginary part.
pub fn to_channels(rd: &RDMap) -> Array3<f64> {
    let (n, m) = rd.data.dim();
    let mut t = Array3::<f64>::zeros((2, n, m));
    for ((i, j), v) in rd.data.indexed_iter() {
        t[(0, i, j)] = v.re;
        t[(1, i, j)] = v.im;
    }
    t
}

/// Inverse of [`to_channels`].
pub fn from_channels(t: &Array3<f64>) -> Result<RDMap> {
    let shape = t.dim();
    if shape.0 != 2 {
        return Err(RimError::shape("(2, N, M)", format!("{shape:?}")));
    }
    let (_, n, m) = shape;
    let mut data = Array2::<Complex64>::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            data[(i, j)] = Complex64::new(t[(0, i, j)], t[(1, i, j)]);
        }
    }
    Ok(RDMap { data })
}

/// Magnitude spectrum in dB: 20 log10(|S| + 1e-12).
pub fn magnitude_db(rd: &RDMap) -> Array2<f64> {
    rd.data.mapv(|v| 20.0 * (v.norm() + DB_EPSILON).log10())
}

/// Checks the two axes of `data` against an expected frame geometry.
pub fn check_dims(data: &Array2<Complex64>, n: usize, m: usize) -> Result<()> {
    if data.dim() != (n, m) {
        return Err(RimError::shape(
            format!("({n}, {m})"),
            format!("{:?}", data.dim()),
        ));
    }
    Ok(())
}

/// Row-major argmax of a real map.
pub fn argmax(map: &Array2<f64>) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::NEG_INFINITY;
    for ((i, j), &v) in map.indexed_iter() {
        if v > best_v {
            best_v = v;
            best = (i, j);
        }
    }
    best
}

/// Mean power per column (ramp), used by diagnostics.
pub fn column_power(data: &Array2<Complex64>) -> Vec<f64> {
    data.axis_iter(Axis(1))
        .map(|col| col.iter().map(|v| v.norm_sqr()).sum::<f64>() / col.len() as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RadarConfig;
    use crate::scenario::ObjectSpec;
    use crate::sim::synth_objects;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force O(N^2) DFT, the independent oracle for the FFT path.
    fn dft_oracle(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        x[i] * Complex64::from_polar(
                            1.0,
                            -std::f64::consts::TAU * (k * i) as f64 / n as f64,
                        )
                    })
                    .sum()
            })
            .collect()
    }

    fn random_frame(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Array2<Complex64> {
        Array2::from_shape_fn((n, m), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn zero_frame_zero_profiles() {
        let frame = Array2::<Complex64>::zeros((16, 4));
        let prof = range_dft(&frame);
        assert!(prof.data.iter().all(|v| v.norm() == 0.0));
        let rd = doppler_dft(&prof);
        assert!(rd.data.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn range_dft_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame = random_frame(&mut rng, 32, 3);
        let prof = range_dft(&frame);
        let window = hann_window(32);
        for j in 0..3 {
            let col: Vec<Complex64> = (0..32).map(|i| frame[(i, j)] * window[i]).collect();
            let expect = dft_oracle(&col);
            for i in 0..32 {
                assert_relative_eq!(prof.data[(i, j)].re, expect[i].re, epsilon = 1e-9);
                assert_relative_eq!(prof.data[(i, j)].im, expect[i].im, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tone_peaks_at_its_bin() {
        let n = 64;
        let k = 9;
        let tone: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, std::f64::consts::TAU * (k * i) as f64 / n as f64))
            .collect();
        let frame = Array2::from_shape_fn((n, 1), |(i, _)| tone[i]);
        let prof = range_dft(&frame);
        let mags: Vec<f64> = (0..n).map(|i| prof.data[(i, 0)].norm()).collect();
        let arg = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(arg, k);
    }

    #[test]
    fn constant_row_peaks_at_center_bin() {
        let m = 16;
        let profiles = RangeProfileMap {
            data: Array2::from_elem((2, m), Complex64::new(1.0, 0.0)),
        };
        let rd = doppler_dft(&profiles);
        let mags: Vec<f64> = (0..m).map(|j| rd.data[(0, j)].norm()).collect();
        let arg = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(arg, m / 2);
    }

    #[test]
    fn object_peak_lands_on_predicted_cell() {
        // 50 m at 5 m/s: range bin 90, Doppler bin M/2 + 4.
        let cfg = RadarConfig::paper_scale();
        let frame = synth_objects(
            &cfg,
            &[ObjectSpec {
                range_m: 50.0,
                velocity_mps: 5.0,
                amplitude: 1.0,
                phase_rad: 0.3,
            }],
        )
        .unwrap();
        let rd = doppler_dft(&range_dft(&frame));
        let peak = argmax(&rd.power());
        assert_eq!(peak, (90, cfg.num_ramps / 2 + 4));
    }

    #[test]
    fn pipeline_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random_frame(&mut rng, 16, 8);
        let y = random_frame(&mut rng, 16, 8);
        let a = Complex64::new(0.7, -1.1);
        let b = Complex64::new(-0.4, 0.2);
        let combo = x.mapv(|v| v * a) + y.mapv(|v| v * b);
        let lhs = doppler_dft(&range_dft(&combo)).data;
        let rhs = doppler_dft(&range_dft(&x)).data.mapv(|v| v * a)
            + doppler_dft(&range_dft(&y)).data.mapv(|v| v * b);
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            assert_relative_eq!(l.re, r.re, max_relative = 1e-12, epsilon = 1e-9);
            assert_relative_eq!(l.im, r.im, max_relative = 1e-12, epsilon = 1e-9);
        }
    }

    #[test]
    fn parseval_unnormalized_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 64;
        let frame = random_frame(&mut rng, n, 1);
        let prof = range_dft(&frame);
        let window = hann_window(n);
        let spec_energy: f64 = (0..n).map(|i| prof.data[(i, 0)].norm_sqr()).sum();
        let time_energy: f64 = (0..n)
            .map(|i| (frame[(i, 0)] * window[i]).norm_sqr())
            .sum();
        assert_relative_eq!(spec_energy, n as f64 * time_energy, max_relative = 1e-10);
    }

    #[test]
    fn modulation_shifts_spectrum_cyclically() {
        // window applied after modulation: modulate the *windowed* signal by
        // comparing against the DFT of the windowed original shifted by k.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 32;
        let k = 5usize;
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let modulated: Vec<Complex64> = (0..n)
            .map(|i| {
                x[i] * Complex64::from_polar(1.0, std::f64::consts::TAU * (k * i) as f64 / n as f64)
            })
            .collect();
        let base = dft_oracle(&x);
        let shifted = dft_oracle(&modulated);
        for i in 0..n {
            let expect = base[(i + n - k) % n];
            assert_relative_eq!(shifted[i].re, expect.re, epsilon = 1e-9);
            assert_relative_eq!(shifted[i].im, expect.im, epsilon = 1e-9);
        }
    }

    #[test]
    fn channel_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let rd = RDMap {
            data: random_frame(&mut rng, 8, 6),
        };
        let t = to_channels(&rd);
        let back = from_channels(&t).unwrap();
        assert_eq!(rd.data, back.data);
    }

    #[test]
    fn multiplying_by_j_swaps_channels_with_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let rd = RDMap {
            data: random_frame(&mut rng, 4, 4),
        };
        let rotated = RDMap {
            data: rd.data.mapv(|v| v * Complex64::new(0.0, 1.0)),
        };
        let t = to_channels(&rd);
        let tr = to_channels(&rotated);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(tr[(0, i, j)], -t[(1, i, j)]);
                assert_eq!(tr[(1, i, j)], t[(0, i, j)]);
            }
        }
    }

    #[test]
    fn purely_real_map_has_zero_imag_channel() {
        let rd = RDMap {
            data: Array2::from_elem((3, 3), Complex64::new(2.5, 0.0)),
        };
        let t = to_channels(&rd);
        assert!(t.index_axis(ndarray::Axis(0), 1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn magnitude_db_reference_points() {
        let mk = |mag: f64| RDMap {
            data: Array2::from_elem((1, 1), Complex64::new(mag, 0.0)),
        };
        assert_relative_eq!(magnitude_db(&mk(1.0))[(0, 0)], 0.0, epsilon = 1e-9);
        assert_relative_eq!(magnitude_db(&mk(10.0))[(0, 0)], 20.0, epsilon = 1e-9);
        let floor = magnitude_db(&mk(0.0))[(0, 0)];
        assert_relative_eq!(floor, 20.0 * DB_EPSILON.log10(), epsilon = 1e-9);
    }

    #[test]
    fn from_channels_rejects_bad_shape() {
        let t = Array3::<f64>::zeros((3, 2, 2));
        assert!(from_channels(&t).is_err());
    }
}
