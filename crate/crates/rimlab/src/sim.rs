//! IF-domain frame synthesis: object sinusoids, receiver noise and
//! non-coherent chirp interference.
//!
//! A frame is the N x M complex matrix of de-chirped IF samples, fast-time
//! index n down the rows and ramp index m across the columns. Objects are
//! point reflectors with beat frequency 2BR/(cT) + 2 f0 v/c and per-ramp
//! Doppler phase; interference from another chirp-sequence radar enters as
//! the mixed chirp difference, gated to the samples where the instantaneous
//! frequency offset fits through the IF band.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::RadarConfig;
use crate::error::{Result, RimError};
use crate::scenario::{InterfererSpec, ObjectSpec, ScenarioSpec};

/// One IF-domain frame plus the ground-truth interference mask.
#[derive(Debug, Clone, PartialEq)]
pub struct IFFrame {
    /// N x M complex samples, fast-time x slow-time.
    pub data: Array2<Complex64>,
    /// True where any interferer contributed to the sample.
    pub mask: Array2<bool>,
}

impl IFFrame {
    pub fn new(data: Array2<Complex64>, mask: Array2<bool>) -> Result<Self> {
        if data.dim() != mask.dim() {
            return Err(RimError::shape(
                format!("mask {:?}", data.dim()),
                format!("{:?}", mask.dim()),
            ));
        }
        Ok(IFFrame { data, mask })
    }

    /// Frame with an all-false mask.
    pub fn unmasked(data: Array2<Complex64>) -> Self {
        let mask = Array2::from_elem(data.dim(), false);
        IFFrame { data, mask }
    }

    pub fn num_samples(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_ramps(&self) -> usize {
        self.data.ncols()
    }

    /// Fraction of samples flagged as interfered.
    pub fn mask_duty(&self) -> f64 {
        let hits = self.mask.iter().filter(|&&b| b).count();
        hits as f64 / self.mask.len() as f64
    }
}

/// Sum of de-chirped point-object sinusoids over one frame.
///
/// Every object above the fast-time Nyquist rate is rejected; an empty
/// object list yields the zero matrix.
pub fn synth_objects(cfg: &RadarConfig, objects: &[ObjectSpec]) -> Result<Array2<Complex64>> {
    cfg.validate()?;
    let (n, m) = (cfg.num_samples, cfg.num_ramps);
    let ts = cfg.sample_interval_s();
    let mut frame = Array2::<Complex64>::zeros((n, m));

    for (idx, obj) in objects.iter().enumerate() {
        if obj.range_m < 0.0 {
            return Err(RimError::config(format!("object {idx}: negative range")));
        }
        let f_beat = cfg.beat_frequency_hz(obj.range_m, obj.velocity_mps);
        if f_beat > cfg.sample_rate_hz() / 2.0 {
            return Err(RimError::Config(format!(
                "object {idx}: beat frequency {:.3} MHz exceeds fs/2 = {:.3} MHz (range overflow)",
                f_beat / 1e6,
                cfg.sample_rate_hz() / 2e6
            )));
        }
        let f_doppler = cfg.doppler_frequency_hz(obj.velocity_mps);

        // exp(j(a n + b m + phi)) factors into per-axis tone vectors.
        let fast: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, std::f64::consts::TAU * f_beat * ts * i as f64))
            .collect();
        let slow: Vec<Complex64> = (0..m)
            .map(|j| {
                Complex64::from_polar(
                    obj.amplitude,
                    std::f64::consts::TAU * f_doppler * cfg.ramp_interval_s * j as f64
                        + obj.phase_rad,
                )
            })
            .collect();
        for i in 0..n {
            for j in 0..m {
                frame[(i, j)] += fast[i] * slow[j];
            }
        }
    }
    Ok(frame)
}

/// Mixed interference of every interferer, gated by the IF bandwidth, plus
/// the boolean mask of gated-in samples.
///
/// Per interferer the contribution at global time t is
/// `exp(j(phi_I(t) - phi_E(t)))`, emitted only where the instantaneous
/// frequency difference satisfies `|f_I(t) - f_E(t)| <= B_if`; both chirps
/// restart their phase at each own ramp start.
pub fn synth_interference(
    cfg: &RadarConfig,
    interferers: &[InterfererSpec],
) -> Result<(Array2<Complex64>, Array2<bool>)> {
    cfg.validate()?;
    let (n, m) = (cfg.num_samples, cfg.num_ramps);
    let ts = cfg.sample_interval_s();
    let ego_slope = cfg.slope_hz_per_s();
    let mut data = Array2::<Complex64>::zeros((n, m));
    let mut mask = Array2::from_elem((n, m), false);

    for (idx, intf) in interferers.iter().enumerate() {
        if intf.sweep_duration_s <= 0.0 {
            return Err(RimError::config(format!(
                "interferer {idx}: sweep duration must be positive"
            )));
        }
        let slope_i = intf.slope_hz_per_s();
        // Samples within a femtosecond-scale band of the interferer's ramp
        // wrap belong to the next ramp; snapping avoids float artifacts when
        // sample instants align exactly with ramp restarts.
        let wrap_band = intf.sweep_duration_s * (1.0 - 1e-9);
        for j in 0..m {
            let ramp_start = j as f64 * cfg.ramp_interval_s;
            for i in 0..n {
                let tau_ego = i as f64 * ts;
                let t = ramp_start + tau_ego;
                let mut tau_int = (t - intf.t_offset_s).rem_euclid(intf.sweep_duration_s);
                if tau_int >= wrap_band {
                    tau_int = 0.0;
                }

                let f_ego = cfg.f0_hz + ego_slope * tau_ego;
                let f_int = intf.f0_hz + slope_i * tau_int;
                if (f_int - f_ego).abs() <= cfg.if_bandwidth_hz {
                    let phase_ego = std::f64::consts::TAU
                        * (cfg.f0_hz * tau_ego + 0.5 * ego_slope * tau_ego * tau_ego);
                    let phase_int = std::f64::consts::TAU
                        * (intf.f0_hz * tau_int + 0.5 * slope_i * tau_int * tau_int);
                    data[(i, j)] += Complex64::from_polar(intf.amplitude, phase_int - phase_ego);
                    mask[(i, j)] = true;
                }
            }
        }
    }
    Ok((data, mask))
}

/// Assemble the full IF frame: objects + scaled noise + scaled interference.
///
/// Noise power is `P_obj / 10^(snr_db/10)` (circularly-symmetric complex
/// Gaussian); interference is scaled so its power over the masked samples
/// equals `(P_obj + sigma^2) * 10^(snir_db/10)`. Infinite `snr_db` disables
/// noise, `-inf` `snir_db` disables interference. The result is a pure
/// function of `(cfg, scenario)`; the noise realisation comes from
/// `scenario.seed`.
pub fn assemble_frame(cfg: &RadarConfig, scenario: &ScenarioSpec) -> Result<IFFrame> {
    let objects = synth_objects(cfg, &scenario.objects)?;
    let p_obj = mean_power(&objects);

    let noise_enabled = scenario.snr_db.is_finite();
    if noise_enabled && p_obj == 0.0 {
        return Err(RimError::numeric(
            "cannot scale noise against an all-zero object component",
        ));
    }
    let sigma2 = if noise_enabled {
        p_obj / 10f64.powf(scenario.snr_db / 10.0)
    } else {
        0.0
    };

    let mut data = objects;
    if sigma2 > 0.0 {
        let mut rng = noise_rng(scenario.seed);
        let std = (sigma2 / 2.0).sqrt();
        for v in data.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re * std, im * std);
        }
    }

    let (interference, mask) = synth_interference(cfg, &scenario.interferers)?;
    let masked_count = mask.iter().filter(|&&b| b).count();
    if scenario.snir_db > f64::NEG_INFINITY && masked_count > 0 {
        if p_obj + sigma2 == 0.0 {
            return Err(RimError::numeric(
                "cannot scale interference against zero signal-plus-noise power",
            ));
        }
        let p_raw: f64 = interference
            .iter()
            .zip(mask.iter())
            .filter(|(_, &hit)| hit)
            .map(|(v, _)| v.norm_sqr())
            .sum::<f64>()
            / masked_count as f64;
        if p_raw > 0.0 {
            let p_target = (p_obj + sigma2) * 10f64.powf(scenario.snir_db / 10.0);
            let beta = (p_target / p_raw).sqrt();
            for (v, x) in data.iter_mut().zip(interference.iter()) {
                *v += beta * x;
            }
        }
    }

    IFFrame::new(data, mask)
}

/// Mean per-sample power of a complex matrix.
pub fn mean_power(data: &Array2<Complex64>) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    data.iter().map(|v| v.norm_sqr()).sum::<f64>() / data.len() as f64
}

/// Dedicated noise stream so scenario sampling and noise generation stay
/// decoupled.
fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x4e4f495345); // "NOISE"
    rng
}
