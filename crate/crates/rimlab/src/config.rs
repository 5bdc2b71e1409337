//! Ego radar constants and scenario sampling bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Spectral window applied before each DFT stage.
///
/// Only the Hann window is shipped; the enum leaves room for others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
}

/// Ego radar and processing constants for one chirp-sequence frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Sweep start frequency (Hz).
    pub f0_hz: f64,
    /// Sweep bandwidth (Hz).
    pub bandwidth_hz: f64,
    /// Sweep duration of one ramp (s).
    pub sweep_duration_s: f64,
    /// Ramp repetition interval (s); equals the sweep duration when there is
    /// no idle time between ramps.
    pub ramp_interval_s: f64,
    /// IF (anti-aliasing) bandwidth (Hz).
    pub if_bandwidth_hz: f64,
    /// Fast-time samples per ramp.
    pub num_samples: usize,
    /// Ramps per frame.
    pub num_ramps: usize,
    /// Antenna count. Frames are simulated per antenna; this is metadata.
    pub num_antennas: usize,
    /// Window applied before the DFT stages.
    pub window: WindowKind,
}

impl RadarConfig {
    /// 77-GHz-band automotive parameters: 79 GHz sweep start, 0.27 GHz
    /// bandwidth, 12.8 us sweeps, 10 MHz IF bandwidth, 512 x 128 frames.
    pub fn paper_scale() -> Self {
        RadarConfig {
            f0_hz: 79.0e9,
            bandwidth_hz: 0.27e9,
            sweep_duration_s: 12.8e-6,
            ramp_interval_s: 12.8e-6,
            if_bandwidth_hz: 10.0e6,
            num_samples: 512,
            num_ramps: 128,
            num_antennas: 16,
            window: WindowKind::Hann,
        }
    }

    /// Reduced 128 x 32 frame for CPU-friendly experiments. The IF bandwidth
    /// is narrowed to stay below the reduced Nyquist rate.
    pub fn desk_scale() -> Self {
        RadarConfig {
            f0_hz: 79.0e9,
            bandwidth_hz: 0.27e9,
            sweep_duration_s: 12.8e-6,
            ramp_interval_s: 12.8e-6,
            if_bandwidth_hz: 4.0e6,
            num_samples: 128,
            num_ramps: 32,
            num_antennas: 16,
            window: WindowKind::Hann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0_hz > 0.0) {
            return Err(RimError::config("sweep start frequency must be positive"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(RimError::config("sweep bandwidth must be positive"));
        }
        if !(self.sweep_duration_s > 0.0) {
            return Err(RimError::config("sweep duration must be positive"));
        }
        if self.ramp_interval_s < self.sweep_duration_s {
            return Err(RimError::config(
                "ramp interval must not be shorter than the sweep duration",
            ));
        }
        if self.num_samples < 2 || self.num_ramps < 2 {
            return Err(RimError::config("frame must be at least 2 x 2 samples"));
        }
        if !(self.if_bandwidth_hz > 0.0) {
            return Err(RimError::config("IF bandwidth must be positive"));
        }
        Ok(())
    }

    /// Fast-time sample rate fs = N / T (Hz).
    pub fn sample_rate_hz(&self) -> f64 {
        self.num_samples as f64 / self.sweep_duration_s
    }

    /// Fast-time sample interval T_s = T / N (s).
    pub fn sample_interval_s(&self) -> f64 {
        self.sweep_duration_s / self.num_samples as f64
    }

    /// Ego chirp slope B / T (Hz/s).
    pub fn slope_hz_per_s(&self) -> f64 {
        self.bandwidth_hz / self.sweep_duration_s
    }

    /// Beat frequency of a point object: 2BR/(cT) + 2 f0 v / c.
    pub fn beat_frequency_hz(&self, range_m: f64, velocity_mps: f64) -> f64 {
        2.0 * self.bandwidth_hz * range_m / (SPEED_OF_LIGHT * self.sweep_duration_s)
            + self.doppler_frequency_hz(velocity_mps)
    }

    /// Doppler frequency of a point object: 2 f0 v / c.
    pub fn doppler_frequency_hz(&self, velocity_mps: f64) -> f64 {
        2.0 * self.f0_hz * velocity_mps / SPEED_OF_LIGHT
    }

    /// Range bin the object peak lands on, modulo N (fractional part kept).
    pub fn range_bin(&self, range_m: f64, velocity_mps: f64) -> f64 {
        self.beat_frequency_hz(range_m, velocity_mps) * self.sweep_duration_s
    }

    /// Doppler bin offset from the zero-velocity bin (fractional part kept).
    pub fn doppler_bin_offset(&self, velocity_mps: f64) -> f64 {
        self.doppler_frequency_hz(velocity_mps) * self.num_ramps as f64 * self.ramp_interval_s
    }

    /// Largest velocity magnitude with an unambiguous Doppler bin.
    pub fn max_unambiguous_velocity_mps(&self) -> f64 {
        SPEED_OF_LIGHT / (4.0 * self.f0_hz * self.ramp_interval_s)
    }
}

/// Closed interval used by scenario sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || self.min > self.max {
            return Err(RimError::Config(format!(
                "invalid interval for {name}: [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Uniform sampling bounds for random scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBounds {
    /// Inclusive range for the object count.
    pub num_objects: (usize, usize),
    /// Object distance (m).
    pub range_m: Interval,
    /// Object radial velocity (m/s).
    pub velocity_mps: Interval,
    /// Object reflection amplitude (linear).
    pub amplitude: Interval,
    /// Inclusive range for the interferer count.
    pub num_interferers: (usize, usize),
    /// Interferer sweep start frequency (Hz).
    pub interferer_f0_hz: Interval,
    /// Interferer sweep bandwidth (Hz).
    pub interferer_bandwidth_hz: Interval,
    /// Interferer sweep duration (s).
    pub interferer_sweep_s: Interval,
    /// Signal-to-noise ratio (dB).
    pub snr_db: Interval,
    /// Interference scaling ratio (dB); see `assemble_frame` for semantics.
    pub snir_db: Interval,
}

impl SamplingBounds {
    /// Object and interferer distributions used for the simulated data set:
    /// 1..20 objects over 0..100 m at -20..20 m/s, one interferer drawn from
    /// 78.9..79.1 GHz start, 0.15..0.25 GHz bandwidth, 12..24 us sweeps,
    /// SNR -15.5..-0.5 dB and SNIR 15..35 dB.
    pub fn paper_scale() -> Self {
        SamplingBounds {
            num_objects: (1, 20),
            range_m: Interval::new(0.0, 100.0),
            velocity_mps: Interval::new(-20.0, 20.0),
            amplitude: Interval::new(1.0, 1.0),
            num_interferers: (1, 1),
            interferer_f0_hz: Interval::new(78.9e9, 79.1e9),
            interferer_bandwidth_hz: Interval::new(0.15e9, 0.25e9),
            interferer_sweep_s: Interval::new(12.0e-6, 24.0e-6),
            snr_db: Interval::new(-15.5, -0.5),
            snir_db: Interval::new(15.0, 35.0),
        }
    }

    /// Same distributions with the distance capped to the reduced desk-scale
    /// unambiguous range.
    pub fn desk_scale() -> Self {
        SamplingBounds {
            range_m: Interval::new(0.0, 30.0),
            ..SamplingBounds::paper_scale()
        }
    }

    /// An alternative scene distribution standing in for measurement-like
    /// data: fewer, stronger-contrast reflectors with a velocity bias.
    pub fn desk_scale_alt() -> Self {
        SamplingBounds {
            num_objects: (2, 12),
            range_m: Interval::new(2.0, 28.0),
            velocity_mps: Interval::new(-18.0, 4.0),
            amplitude: Interval::new(0.25, 4.0),
            ..SamplingBounds::paper_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_objects.0 > self.num_objects.1 {
            return Err(RimError::config("invalid object count bounds"));
        }
        if self.num_interferers.0 > self.num_interferers.1 {
            return Err(RimError::config("invalid interferer count bounds"));
        }
        self.range_m.validate("range_m")?;
        if self.range_m.min < 0.0 {
            return Err(RimError::config("object range must be non-negative"));
        }
        self.velocity_mps.validate("velocity_mps")?;
        self.amplitude.validate("amplitude")?;
        self.interferer_f0_hz.validate("interferer_f0_hz")?;
        self.interferer_bandwidth_hz
            .validate("interferer_bandwidth_hz")?;
        self.interferer_sweep_s.validate("interferer_sweep_s")?;
        if self.interferer_sweep_s.min <= 0.0 {
            return Err(RimError::config("interferer sweep duration must be positive"));
        }
        self.snr_db.validate("snr_db")?;
        self.snir_db.validate("snir_db")?;
        Ok(())
    }
}
