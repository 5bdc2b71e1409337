//! Random scene descriptions: point objects, interfering radars, and the
//! noise/interference levels of one simulated frame.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RadarConfig, SamplingBounds};
use crate::error::{Result, RimError};

/// One point reflector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    /// Distance from the radar (m).
    pub range_m: f64,
    /// Radial velocity (m/s), positive receding.
    pub velocity_mps: f64,
    /// Reflection amplitude (linear).
    pub amplitude: f64,
    /// Initial phase (rad).
    pub phase_rad: f64,
}

/// One interfering chirp-sequence radar. Its ramps repeat back-to-back with
/// period `sweep_duration_s`, shifted by `t_offset_s` against the ego frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfererSpec {
    /// Sweep start frequency (Hz).
    pub f0_hz: f64,
    /// Sweep bandwidth (Hz).
    pub bandwidth_hz: f64,
    /// Sweep duration (s).
    pub sweep_duration_s: f64,
    /// Start-time offset of the interferer ramp pattern (s).
    pub t_offset_s: f64,
    /// Linear amplitude before SNIR scaling.
    pub amplitude: f64,
}

impl InterfererSpec {
    /// Interferer chirp slope (Hz/s).
    pub fn slope_hz_per_s(&self) -> f64 {
        self.bandwidth_hz / self.sweep_duration_s
    }
}

/// Everything random about one frame: the scene, the disturbance levels and
/// the seed that makes noise generation reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub objects: Vec<ObjectSpec>,
    pub interferers: Vec<InterfererSpec>,
    /// Object power over noise power (dB). `+inf` disables noise.
    pub snr_db: f64,
    /// Interference level (dB) relative to object-plus-noise power; larger
    /// values produce stronger interference. `-inf` disables interference.
    pub snir_db: f64,
    /// Seed for the frame's noise realisation.
    pub seed: u64,
}

impl ScenarioSpec {
    /// A quiet scene: no noise, no interference.
    pub fn noiseless(objects: Vec<ObjectSpec>) -> Self {
        ScenarioSpec {
            objects,
            interferers: Vec::new(),
            snr_db: f64::INFINITY,
            snir_db: f64::NEG_INFINITY,
            seed: 0,
        }
    }
}

/// Draw a random scenario from uniform distributions over `bounds`.
///
/// Object count, per-object range/velocity/amplitude/phase, interferer
/// parameters and the SNR/SNIR levels are all sampled independently; the
/// result is deterministic for a given RNG state.
pub fn sample_scenario(
    rng: &mut ChaCha8Rng,
    cfg: &RadarConfig,
    bounds: &SamplingBounds,
) -> Result<ScenarioSpec> {
    cfg.validate()?;
    bounds.validate()?;

    let v_max = cfg.max_unambiguous_velocity_mps();
    if bounds.velocity_mps.min.abs() > v_max || bounds.velocity_mps.max.abs() > v_max {
        return Err(RimError::config(format!(
            "velocity bounds exceed the unambiguous span of {:.1} m/s",
            v_max
        )));
    }

    let num_objects = rng.gen_range(bounds.num_objects.0..=bounds.num_objects.1);
    let objects = (0..num_objects)
        .map(|_| ObjectSpec {
            range_m: sample_interval(rng, bounds.range_m.min, bounds.range_m.max),
            velocity_mps: sample_interval(rng, bounds.velocity_mps.min, bounds.velocity_mps.max),
            amplitude: sample_interval(rng, bounds.amplitude.min, bounds.amplitude.max),
            phase_rad: rng.gen_range(0.0..std::f64::consts::TAU),
        })
        .collect();

    let num_interferers = rng.gen_range(bounds.num_interferers.0..=bounds.num_interferers.1);
    let interferers = (0..num_interferers)
        .map(|_| {
            let sweep = sample_interval(
                rng,
                bounds.interferer_sweep_s.min,
                bounds.interferer_sweep_s.max,
            );
            InterfererSpec {
                f0_hz: sample_interval(rng, bounds.interferer_f0_hz.min, bounds.interferer_f0_hz.max),
                bandwidth_hz: sample_interval(
                    rng,
                    bounds.interferer_bandwidth_hz.min,
                    bounds.interferer_bandwidth_hz.max,
                ),
                sweep_duration_s: sweep,
                t_offset_s: sample_interval(rng, 0.0, sweep),
                amplitude: 1.0,
            }
        })
        .collect();

    Ok(ScenarioSpec {
        objects,
        interferers,
        snr_db: sample_interval(rng, bounds.snr_db.min, bounds.snr_db.max),
        snir_db: sample_interval(rng, bounds.snir_db.min, bounds.snir_db.max),
        seed: rng.gen(),
    })
}

/// Uniform draw that tolerates degenerate (point) intervals.
fn sample_interval(rng: &mut ChaCha8Rng, min: f64, max: f64) -> f64 {
    if min == max {
        min
    } else {
        rng.gen_range(min..max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn sampled_values_stay_inside_bounds() {
        let cfg = RadarConfig::paper_scale();
        let bounds = SamplingBounds::paper_scale();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let s = sample_scenario(&mut rng, &cfg, &bounds).unwrap();
            assert!(!s.objects.is_empty() && s.objects.len() <= 20);
            for o in &s.objects {
                assert!((0.0..100.0).contains(&o.range_m));
                assert!((-20.0..20.0).contains(&o.velocity_mps));
            }
            assert_eq!(s.interferers.len(), 1);
            for i in &s.interferers {
                assert!((78.9e9..79.1e9).contains(&i.f0_hz));
                assert!((0.15e9..0.25e9).contains(&i.bandwidth_hz));
                assert!((12.0e-6..24.0e-6).contains(&i.sweep_duration_s));
                assert!((0.0..i.sweep_duration_s).contains(&i.t_offset_s));
            }
            assert!((-15.5..-0.5).contains(&s.snr_db));
            assert!((15.0..35.0).contains(&s.snir_db));
        }
    }

    #[test]
    fn degenerate_bounds_pin_values() {
        let cfg = RadarConfig::paper_scale();
        let mut bounds = SamplingBounds::paper_scale();
        bounds.range_m = crate::config::Interval::new(50.0, 50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_scenario(&mut rng, &cfg, &bounds).unwrap();
        assert!(s.objects.iter().all(|o| o.range_m == 50.0));
    }

    #[test]
    fn same_seed_same_scenario() {
        let cfg = RadarConfig::paper_scale();
        let bounds = SamplingBounds::paper_scale();
        let a = sample_scenario(&mut ChaCha8Rng::seed_from_u64(99), &cfg, &bounds).unwrap();
        let b = sample_scenario(&mut ChaCha8Rng::seed_from_u64(99), &cfg, &bounds).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_bounds_are_config_errors() {
        let cfg = RadarConfig::paper_scale();
        let mut bounds = SamplingBounds::paper_scale();
        bounds.snr_db = crate::config::Interval::new(3.0, -3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_scenario(&mut rng, &cfg, &bounds),
            Err(RimError::Config(_))
        ));
    }
}
