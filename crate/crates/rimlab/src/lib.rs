//! rimlab — a desk-scale laboratory for FMCW radar mutual-interference
//! mitigation.
//!
//! The crate simulates interfered chirp-sequence radar frames, processes
//! them into range-Doppler maps, denoises them with a small trainable CNN
//! and with classical signal-processing baselines (zeroing, IMAT, ramp
//! filtering), and scores every method with CA-CFAR-anchored SINR
//! statistics.
//!
//! Start with the runnable programs under `examples/`; each one exercises a
//! single capability end to end. The `rimlab` binary wraps the experiment
//! workflows (dataset generation, training, sweeps, Monte-Carlo method
//! comparison) behind a thin CLI.

pub mod cfar;
pub mod cnn;
pub mod config;
pub mod error;
pub mod metrics;
pub mod mitigation;
pub mod pipeline;
pub mod scenario;
pub mod sim;

pub use cfar::{ca_cfar, CfarParams, PeakSet};
pub use config::{Interval, RadarConfig, SamplingBounds, WindowKind, SPEED_OF_LIGHT};
pub use error::{Result, RimError};
pub use metrics::{sinr, sinr_cdf};
pub use mitigation::{imat, ramp_filter, zeroing, ImatParams};
pub use pipeline::{
    doppler_dft, from_channels, magnitude_db, range_dft, rd_map, to_channels, RDMap,
    RangeProfileMap,
};
pub use scenario::{sample_scenario, InterfererSpec, ObjectSpec, ScenarioSpec};
pub use sim::{assemble_frame, synth_interference, synth_objects, IFFrame};
