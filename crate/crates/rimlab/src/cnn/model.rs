//! The denoising network: a stack of same-size 3x3 convolution layers with
//! ReLU activations, batch normalization on the interior layers and a
//! linear two-kernel output layer, plus exact backpropagation.

use ndarray::{Array1, Array3, Array4, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::arch::{ArchitectureSpec, INPUT_CHANNELS, KERNEL_SIZE};
use super::layers::{
    conv2d_backward, conv2d_forward, relu_backward, relu_forward, BatchNorm, BnCache, Scalar,
};
use crate::error::{Result, RimError};

/// One convolutional composite layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    /// (out_channels, in_channels, 3, 3) kernel tensor.
    pub weight: Array4<T>,
    pub bias: Array1<T>,
    pub batch_norm: Option<BatchNorm<T>>,
    pub relu: bool,
}

/// Full network state.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    arch: ArchitectureSpec,
    pub layers: Vec<Layer<T>>,
}

/// Activations and normalization intermediates captured by a train-mode
/// forward pass; consumed by [`Model::backward`].
pub struct ForwardCache<T> {
    /// `activations[0]` is the input batch, `activations[i+1]` the output of
    /// layer `i`.
    activations: Vec<Array4<T>>,
    bn: Vec<Option<BnCache<T>>>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn output(&self) -> &Array4<T> {
        self.activations.last().expect("non-empty cache")
    }
}

/// Per-layer parameter gradients.
#[derive(Debug, Clone)]
pub struct LayerGrads<T> {
    pub weight: Array4<T>,
    pub bias: Array1<T>,
    pub gamma: Option<Array1<T>>,
    pub beta: Option<Array1<T>>,
}

/// Gradients of the loss w.r.t. every learnable parameter and the input.
#[derive(Debug, Clone)]
pub struct Grads<T> {
    pub layers: Vec<LayerGrads<T>>,
    pub input: Array4<T>,
}

impl<T: Scalar> Model<T> {
    /// He-uniform initialisation of the convolution kernels, zero biases,
    /// identity batch-norm; deterministic in `seed`.
    pub fn init(arch: &ArchitectureSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(arch.num_layers());
        for (idx, (c_in, c_out)) in arch.layer_dims().into_iter().enumerate() {
            let fan_in = (c_in * KERNEL_SIZE * KERNEL_SIZE) as f64;
            let limit = (6.0 / fan_in).sqrt();
            let weight = Array4::from_shape_fn((c_out, c_in, KERNEL_SIZE, KERNEL_SIZE), |_| {
                T::from_f64(rng.gen_range(-limit..limit))
            });
            layers.push(Layer {
                weight,
                bias: Array1::zeros(c_out),
                batch_norm: arch.has_batch_norm(idx).then(|| BatchNorm::new(c_out)),
                relu: arch.has_relu(idx),
            });
        }
        Model {
            arch: arch.clone(),
            layers,
        }
    }

    pub fn arch(&self) -> &ArchitectureSpec {
        &self.arch
    }

    pub fn has_batch_norm(&self) -> bool {
        self.layers.iter().any(|l| l.batch_norm.is_some())
    }

    pub fn param_count(&self) -> usize {
        self.arch.param_count()
    }

    fn check_input(&self, input: &Array4<T>) -> Result<()> {
        let (_, c, _, _) = input.dim();
        if c != INPUT_CHANNELS {
            return Err(RimError::shape(
                format!("{INPUT_CHANNELS} input channels"),
                format!("{c}"),
            ));
        }
        Ok(())
    }

    /// Train-mode forward over a batch; caches activations for
    /// [`Model::backward`] and updates batch-norm running statistics.
    ///
    /// Batches of one are rejected when the model contains batch norm, whose
    /// batch statistics would be degenerate.
    pub fn forward_train(&mut self, input: &Array4<T>) -> Result<ForwardCache<T>> {
        self.check_input(input)?;
        if self.has_batch_norm() && input.dim().0 < 2 {
            return Err(RimError::config(
                "train-mode forward needs a batch of at least 2 for batch-norm statistics",
            ));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut bn_caches = Vec::with_capacity(self.layers.len());
        activations.push(input.clone());
        for layer in &mut self.layers {
            let x = activations.last().unwrap();
            let mut y = conv2d_forward(x, &layer.weight, &layer.bias);
            let bn_cache = match &mut layer.batch_norm {
                Some(bn) => {
                    let (normed, cache) = bn.forward_train(&y);
                    y = normed;
                    Some(cache)
                }
                None => None,
            };
            if layer.relu {
                relu_forward(&mut y);
            }
            bn_caches.push(bn_cache);
            activations.push(y);
        }
        Ok(ForwardCache {
            activations,
            bn: bn_caches,
        })
    }

    /// Eval-mode forward over a batch; batch norm uses running statistics.
    pub fn forward_eval(&self, input: &Array4<T>) -> Result<Array4<T>> {
        self.check_input(input)?;
        let mut x = input.clone();
        for layer in &self.layers {
            let mut y = conv2d_forward(&x, &layer.weight, &layer.bias);
            if let Some(bn) = &layer.batch_norm {
                y = bn.forward_eval(&y);
            }
            if layer.relu {
                relu_forward(&mut y);
            }
            x = y;
        }
        Ok(x)
    }

    /// Eval-mode forward of a single (2, H, W) item.
    pub fn infer(&self, input: &Array3<T>) -> Result<Array3<T>> {
        let (c, h, w) = input.dim();
        let batched = input
            .clone()
            .into_shape_with_order((1, c, h, w))
            .expect("reshape single item");
        let out = self.forward_eval(&batched)?;
        Ok(out.index_axis(Axis(0), 0).to_owned())
    }

    /// Exact gradients of every learnable parameter and of the input, given
    /// the cache of a train-mode forward and the loss gradient at the
    /// output.
    pub fn backward(&self, cache: &ForwardCache<T>, grad_output: &Array4<T>) -> Result<Grads<T>> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(RimError::data("forward cache does not match the model"));
        }
        if grad_output.dim() != cache.output().dim() {
            return Err(RimError::shape(
                format!("{:?}", cache.output().dim()),
                format!("{:?}", grad_output.dim()),
            ));
        }
        let mut grad = grad_output.clone();
        let mut layer_grads: Vec<LayerGrads<T>> = Vec::with_capacity(self.layers.len());
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            if layer.relu {
                relu_backward(&cache.activations[idx + 1], &mut grad);
            }
            let (gamma, beta) = match (&layer.batch_norm, &cache.bn[idx]) {
                (Some(bn), Some(bn_cache)) => {
                    let (g_in, g_gamma, g_beta) = bn.backward(bn_cache, &grad);
                    grad = g_in;
                    (Some(g_gamma), Some(g_beta))
                }
                (None, None) => (None, None),
                _ => return Err(RimError::data("batch-norm cache mismatch")),
            };
            let (conv_grads, g_input) =
                conv2d_backward(&cache.activations[idx], &layer.weight, &grad);
            grad = g_input;
            layer_grads.push(LayerGrads {
                weight: conv_grads.weight,
                bias: conv_grads.bias,
                gamma,
                beta,
            });
        }
        layer_grads.reverse();
        Ok(Grads {
            layers: layer_grads,
            input: grad,
        })
    }

    /// Flat views of every learnable parameter, in checkpoint declaration
    /// order (per layer: weight, bias, gamma, beta).
    pub fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            out.push(layer.weight.as_slice_mut().expect("contiguous weight"));
            out.push(layer.bias.as_slice_mut().expect("contiguous bias"));
            if let Some(bn) = &mut layer.batch_norm {
                out.push(bn.gamma.as_slice_mut().expect("contiguous gamma"));
                out.push(bn.beta.as_slice_mut().expect("contiguous beta"));
            }
        }
        out
    }
}

impl<T: Scalar> Grads<T> {
    /// Flat views matching [`Model::param_slices_mut`] order.
    pub fn grad_slices(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for lg in &self.layers {
            out.push(lg.weight.as_slice().expect("contiguous weight grad"));
            out.push(lg.bias.as_slice().expect("contiguous bias grad"));
            if let Some(g) = &lg.gamma {
                out.push(g.as_slice().expect("contiguous gamma grad"));
            }
            if let Some(b) = &lg.beta {
                out.push(b.as_slice().expect("contiguous beta grad"));
            }
        }
        out
    }
}
