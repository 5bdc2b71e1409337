//! Training loop: normalized RD-map pairs, mini-batch Adam on the MSE loss,
//! per-epoch validation MSE/SINR and best-checkpoint early stopping.

use ndarray::{Array3, Array4, Axis};
use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamParams};
use super::loss::mse_loss;
use super::model::Model;
use crate::cfar::{CfarParams, PeakSet};
use crate::error::{Result, RimError};
use crate::metrics::sinr;
use crate::pipeline::{from_channels, RDMap};

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub adam: AdamParams,
    pub batch_size: usize,
    pub epochs: usize,
    /// Consecutive epochs without validation-MSE improvement before early
    /// stop. The best-validation parameters are restored either way.
    pub patience: usize,
    /// Shuffle-order seed.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            adam: AdamParams::default(),
            batch_size: 8,
            epochs: 100,
            patience: 10,
            seed: 0,
        }
    }
}

/// One normalized input/target pair.
///
/// Both maps are divided by the maximum magnitude of the *interfered* map;
/// the scalar is kept so network outputs can be rescaled before metric
/// evaluation.
#[derive(Debug, Clone)]
pub struct TrainSample {
    /// Normalized interfered RD map, channels (re, im).
    pub input: Array3<f32>,
    /// Normalized clean RD map, channels (re, im).
    pub target: Array3<f32>,
    /// The normalization scalar (max |interfered|).
    pub scale: f64,
}

/// Validation sample: a pair plus the clean-map CFAR peaks used to score
/// per-epoch SINR.
#[derive(Debug, Clone)]
pub struct ValSample {
    pub sample: TrainSample,
    pub peaks: PeakSet,
}

/// Per-epoch curves.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub train_mse: f64,
    pub val_mse: f64,
    /// Mean validation SINR in dB (NaN when no validation frame has peaks).
    pub val_sinr_db: f64,
}

/// Training outcome; the model passed to [`train`] holds the
/// best-validation parameters on return.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
}

/// Normalize an interfered/clean RD-map pair by the interfered map's maximum
/// magnitude.
pub fn normalize_pair(interfered: &RDMap, clean: &RDMap) -> Result<TrainSample> {
    if interfered.data.dim() != clean.data.dim() {
        return Err(RimError::shape(
            format!("{:?}", interfered.data.dim()),
            format!("{:?}", clean.data.dim()),
        ));
    }
    let scale = normalization_scale(interfered);
    let (n, m) = interfered.data.dim();
    let mut input = Array3::<f32>::zeros((2, n, m));
    let mut target = Array3::<f32>::zeros((2, n, m));
    for ((i, j), v) in interfered.data.indexed_iter() {
        input[(0, i, j)] = (v.re / scale) as f32;
        input[(1, i, j)] = (v.im / scale) as f32;
    }
    for ((i, j), v) in clean.data.indexed_iter() {
        target[(0, i, j)] = (v.re / scale) as f32;
        target[(1, i, j)] = (v.im / scale) as f32;
    }
    Ok(TrainSample {
        input,
        target,
        scale,
    })
}

/// Max-magnitude scalar used by [`normalize_pair`]; 1 for an all-zero map.
pub fn normalization_scale(interfered: &RDMap) -> f64 {
    let max = interfered.max_magnitude();
    if max > 0.0 {
        max
    } else {
        1.0
    }
}

/// Rescale a network output back into an RD map.
pub fn denormalize_output(output: &Array3<f32>, scale: f64) -> Result<RDMap> {
    let as_f64 = output.mapv(|v| v as f64 * scale);
    from_channels(&as_f64)
}

/// Run the interfered map through the model with its own normalization and
/// return the denoised RD map.
pub fn denoise_rd_map(model: &Model<f32>, interfered: &RDMap) -> Result<RDMap> {
    let scale = normalization_scale(interfered);
    let (n, m) = interfered.data.dim();
    let mut input = Array3::<f32>::zeros((2, n, m));
    for ((i, j), v) in interfered.data.indexed_iter() {
        input[(0, i, j)] = (v.re / scale) as f32;
        input[(1, i, j)] = (v.im / scale) as f32;
    }
    let output = model.infer(&input)?;
    denormalize_output(&output, scale)
}

fn stack_batch(samples: &[TrainSample], indices: &[usize]) -> (Array4<f32>, Array4<f32>) {
    let (c, h, w) = samples[indices[0]].input.dim();
    let mut input = Array4::<f32>::zeros((indices.len(), c, h, w));
    let mut target = Array4::<f32>::zeros((indices.len(), c, h, w));
    for (slot, &idx) in indices.iter().enumerate() {
        input.index_axis_mut(Axis(0), slot).assign(&samples[idx].input);
        target
            .index_axis_mut(Axis(0), slot)
            .assign(&samples[idx].target);
    }
    (input, target)
}

/// Mini-batch training with Adam; resumes from whatever parameters the model
/// currently holds, so fine-tuning a loaded checkpoint is the same call.
///
/// Size-1 remainder batches are dropped (batch-norm statistics need at least
/// two items). Returns an error on empty datasets or a non-finite loss.
pub fn train(
    model: &mut Model<f32>,
    train_set: &[TrainSample],
    val_set: &[ValSample],
    cfar: &CfarParams,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if train_set.is_empty() {
        return Err(RimError::data("empty training set"));
    }
    if val_set.is_empty() {
        return Err(RimError::data("empty validation set"));
    }
    if cfg.batch_size == 0 {
        return Err(RimError::config("batch size must be positive"));
    }
    if cfg.epochs == 0 {
        return Err(RimError::config("epoch count must be positive"));
    }
    cfg.adam.validate()?;

    let mut adam = Adam::new(cfg.adam);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut indices: Vec<usize> = (0..train_set.len()).collect();

    let mut best: Option<(usize, f64, Model<f32>)> = None;
    let mut stale_epochs = 0usize;
    let mut epochs = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            if chunk.len() < 2 && model.has_batch_norm() {
                continue;
            }
            let (input, target) = stack_batch(train_set, chunk);
            let cache = model.forward_train(&input)?;
            let (loss, grad) = mse_loss(cache.output(), &target)?;
            if !loss.is_finite() {
                return Err(RimError::Numeric(format!(
                    "training loss diverged at epoch {epoch} (loss = {loss})"
                )));
            }
            let grads = model.backward(&cache, &grad)?;
            adam.step(model, &grads)?;
            loss_sum += loss * chunk.len() as f64;
            loss_count += chunk.len();
        }
        if loss_count == 0 {
            return Err(RimError::config(
                "no usable batches (batch-norm models need batches of at least 2)",
            ));
        }
        let train_mse = loss_sum / loss_count as f64;

        let (val_mse, val_sinr_db) = validate(model, val_set, cfar)?;
        if !val_mse.is_finite() {
            return Err(RimError::Numeric(format!(
                "validation loss diverged at epoch {epoch} (loss = {val_mse})"
            )));
        }
        epochs.push(EpochStats {
            train_mse,
            val_mse,
            val_sinr_db,
        });

        let improved = best.as_ref().map_or(true, |(_, b, _)| val_mse < *b);
        if improved {
            best = Some((epoch, val_mse, model.clone()));
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs > cfg.patience {
                break;
            }
        }
    }

    let (best_epoch, best_val_mse, best_model) = best.expect("at least one epoch ran");
    *model = best_model;
    Ok(TrainReport {
        epochs,
        best_epoch,
        best_val_mse,
    })
}

/// Eval-mode validation: mean MSE plus mean SINR of the denormalized
/// predictions at the stored clean-map peaks.
fn validate(model: &Model<f32>, val_set: &[ValSample], cfar: &CfarParams) -> Result<(f64, f64)> {
    let mut mse_sum = 0.0;
    let mut sinr_sum = 0.0;
    let mut sinr_count = 0usize;
    for vs in val_set {
        let (c, h, w) = vs.sample.input.dim();
        let input = vs
            .sample
            .input
            .clone()
            .into_shape_with_order((1, c, h, w))
            .expect("batch of one");
        let target = vs
            .sample
            .target
            .clone()
            .into_shape_with_order((1, c, h, w))
            .expect("batch of one");
        let pred = model.forward_eval(&input)?;
        let (loss, _) = mse_loss(&pred, &target)?;
        mse_sum += loss;
        if !vs.peaks.is_empty() {
            let single = pred.index_axis(Axis(0), 0).to_owned();
            let rd = denormalize_output(&single, vs.sample.scale)?;
            sinr_sum += sinr(&rd, &vs.peaks, cfar)?;
            sinr_count += 1;
        }
    }
    let val_mse = mse_sum / val_set.len() as f64;
    let val_sinr = if sinr_count > 0 {
        sinr_sum / sinr_count as f64
    } else {
        f64::NAN
    };
    Ok((val_mse, val_sinr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::arch::ArchitectureSpec;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use num_complex::Complex64;
    use rand::Rng;

    fn random_rd(rng: &mut ChaCha8Rng, n: usize, m: usize, scale: f64) -> RDMap {
        RDMap {
            data: Array2::from_shape_fn((n, m), |_| {
                Complex64::new(
                    rng.gen_range(-scale..scale),
                    rng.gen_range(-scale..scale),
                )
            }),
        }
    }

    #[test]
    fn normalization_roundtrip_is_exact_to_1e12() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let interfered = random_rd(&mut rng, 8, 8, 40.0);
        let scale = normalization_scale(&interfered);
        let normalized = RDMap {
            data: interfered.data.mapv(|v| v / scale),
        };
        let back = RDMap {
            data: normalized.data.mapv(|v| v * scale),
        };
        for (a, b) in back.data.iter().zip(interfered.data.iter()) {
            assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
            assert_relative_eq!(a.im, b.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalized_input_peaks_at_unit_magnitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let interfered = random_rd(&mut rng, 6, 6, 25.0);
        let clean = random_rd(&mut rng, 6, 6, 10.0);
        let s = normalize_pair(&interfered, &clean).unwrap();
        let max = s
            .input
            .iter()
            .map(|v| v.abs())
            .fold(0.0f32, f32::max);
        assert!(max <= 1.0 + 1e-6);
        assert!(s.scale > 0.0);
    }

    #[test]
    fn overfits_a_single_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let interfered = random_rd(&mut rng, 8, 8, 1.0);
        let clean = random_rd(&mut rng, 8, 8, 0.5);
        let sample = normalize_pair(&interfered, &clean).unwrap();
        let val = ValSample {
            sample: sample.clone(),
            peaks: PeakSet::default(),
        };

        let arch = ArchitectureSpec::new(vec![8, 2]).unwrap();
        let mut model = Model::<f32>::init(&arch, 5);
        let cfg = TrainConfig {
            adam: AdamParams {
                learning_rate: 3e-3,
                ..AdamParams::default()
            },
            batch_size: 1,
            epochs: 1500,
            patience: 1500,
            seed: 6,
        };
        let report = train(&mut model, &[sample], &[val], &CfarParams::default(), &cfg).unwrap();
        let first = report.epochs.first().unwrap().train_mse;
        let best = report.best_val_mse;
        assert!(
            best < first * 0.01,
            "memorization failed: first {first}, best {best}"
        );
    }

    #[test]
    fn empty_datasets_are_rejected() {
        let arch = ArchitectureSpec::new(vec![8, 2]).unwrap();
        let mut model = Model::<f32>::init(&arch, 1);
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(&mut model, &[], &[], &CfarParams::default(), &cfg),
            Err(RimError::Data(_))
        ));
    }

    #[test]
    fn diverging_loss_aborts_with_numeric_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let interfered = random_rd(&mut rng, 8, 8, 1.0);
        let clean = random_rd(&mut rng, 8, 8, 1.0);
        let sample = normalize_pair(&interfered, &clean).unwrap();
        let val = ValSample {
            sample: sample.clone(),
            peaks: PeakSet::default(),
        };
        let arch = ArchitectureSpec::new(vec![8, 2]).unwrap();
        let mut model = Model::<f32>::init(&arch, 8);
        let cfg = TrainConfig {
            adam: AdamParams {
                learning_rate: 1e30,
                ..AdamParams::default()
            },
            batch_size: 1,
            epochs: 50,
            patience: 50,
            seed: 9,
        };
        let err = train(&mut model, &[sample], &[val], &CfarParams::default(), &cfg);
        assert!(matches!(err, Err(RimError::Numeric(_))), "{err:?}");
    }

    #[test]
    fn training_resumes_from_existing_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let samples: Vec<TrainSample> = (0..4)
            .map(|_| {
                let interfered = random_rd(&mut rng, 8, 8, 1.0);
                let clean = random_rd(&mut rng, 8, 8, 0.5);
                normalize_pair(&interfered, &clean).unwrap()
            })
            .collect();
        let val: Vec<ValSample> = samples
            .iter()
            .map(|s| ValSample {
                sample: s.clone(),
                peaks: PeakSet::default(),
            })
            .collect();

        let arch = ArchitectureSpec::new(vec![8, 2]).unwrap();
        let mut model = Model::<f32>::init(&arch, 11);
        let cfg = TrainConfig {
            batch_size: 2,
            epochs: 30,
            patience: 30,
            seed: 12,
            ..TrainConfig::default()
        };
        let first = train(&mut model, &samples, &val, &CfarParams::default(), &cfg).unwrap();
        // fine-tune: the very first epoch of the resumed run should start
        // near the previous best, far below a fresh model's initial loss
        let resumed = train(&mut model, &samples, &val, &CfarParams::default(), &cfg).unwrap();
        assert!(
            resumed.epochs[0].train_mse < first.epochs[0].train_mse * 0.5,
            "resume started from scratch: {} vs {}",
            resumed.epochs[0].train_mse,
            first.epochs[0].train_mse
        );
    }
}
