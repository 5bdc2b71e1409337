//! Layer primitives: same-size 3x3 convolution, ReLU and batch
//! normalization, each with its exact backward pass.
//!
//! Everything is generic over the float type: training runs in `f32`, the
//! gradient-check tests use the same code paths in `f64`.

use ndarray::{Array1, Array3, Array4, Axis};
use rayon::prelude::*;

use super::arch::KERNEL_SIZE;

/// Float scalar the network can run in.
pub trait Scalar:
    num_traits::Float
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}

/// 3x3 convolution with zero padding 1 over one (C_in, H, W) item.
pub fn conv2d_single<T: Scalar>(
    input: &Array3<T>,
    weight: &Array4<T>,
    bias: &Array1<T>,
) -> Array3<T> {
    let (c_in, h, w) = input.dim();
    let (c_out, wc_in, kh, kw) = weight.dim();
    assert_eq!(c_in, wc_in, "input channels");
    assert_eq!((kh, kw), (KERNEL_SIZE, KERNEL_SIZE));
    let input_s = input.as_slice().expect("contiguous input");
    let weight_s = weight.as_slice().expect("contiguous weight");

    let mut out = Array3::<T>::zeros((c_out, h, w));
    {
        let out_s = out.as_slice_mut().expect("contiguous output");
        for oc in 0..c_out {
            let plane = &mut out_s[oc * h * w..(oc + 1) * h * w];
            plane.fill(bias[oc]);
            for ic in 0..c_in {
                let in_plane = &input_s[ic * h * w..(ic + 1) * h * w];
                let w_base = (oc * c_in + ic) * KERNEL_SIZE * KERNEL_SIZE;
                for ky in 0..KERNEL_SIZE {
                    let dy = ky as isize - 1;
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (h as isize).min(h as isize - dy) as usize;
                    for kx in 0..KERNEL_SIZE {
                        let dx = kx as isize - 1;
                        let x0 = (-dx).max(0) as usize;
                        let x1 = (w as isize).min(w as isize - dx) as usize;
                        let wv = weight_s[w_base + ky * KERNEL_SIZE + kx];
                        if wv == T::zero() {
                            continue;
                        }
                        for y in y0..y1 {
                            let src = ((y as isize + dy) as usize) * w;
                            let dst = y * w;
                            for x in x0..x1 {
                                plane[dst + x] += wv * in_plane[src + (x as isize + dx) as usize];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Batched convolution forward; items run in parallel.
pub fn conv2d_forward<T: Scalar>(
    input: &Array4<T>,
    weight: &Array4<T>,
    bias: &Array1<T>,
) -> Array4<T> {
    let (b, _, h, w) = input.dim();
    let c_out = weight.dim().0;
    let items: Vec<Array3<T>> = input
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|item| conv2d_single(&item.to_owned(), weight, bias))
        .collect();
    let mut out = Array4::<T>::zeros((b, c_out, h, w));
    for (i, item) in items.into_iter().enumerate() {
        out.index_axis_mut(Axis(0), i).assign(&item);
    }
    out
}

/// Gradients of a convolution layer's parameters.
#[derive(Debug, Clone)]
pub struct ConvGrads<T> {
    pub weight: Array4<T>,
    pub bias: Array1<T>,
}

fn conv2d_backward_single<T: Scalar>(
    input: &Array3<T>,
    weight: &Array4<T>,
    grad_out: &Array3<T>,
) -> (ConvGrads<T>, Array3<T>) {
    let (c_in, h, w) = input.dim();
    let c_out = weight.dim().0;
    let input_s = input.as_slice().expect("contiguous input");
    let weight_s = weight.as_slice().expect("contiguous weight");
    let gout_s = grad_out.as_slice().expect("contiguous grad");

    let mut g_weight = Array4::<T>::zeros(weight.dim());
    let mut g_bias = Array1::<T>::zeros(c_out);
    let mut g_input = Array3::<T>::zeros(input.dim());
    {
        let gw = g_weight.as_slice_mut().unwrap();
        let gi = g_input.as_slice_mut().unwrap();
        for oc in 0..c_out {
            let g_plane = &gout_s[oc * h * w..(oc + 1) * h * w];
            g_bias[oc] = g_plane.iter().copied().sum();
            for ic in 0..c_in {
                let in_plane = &input_s[ic * h * w..(ic + 1) * h * w];
                let gi_plane_base = ic * h * w;
                let w_base = (oc * c_in + ic) * KERNEL_SIZE * KERNEL_SIZE;
                for ky in 0..KERNEL_SIZE {
                    let dy = ky as isize - 1;
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (h as isize).min(h as isize - dy) as usize;
                    for kx in 0..KERNEL_SIZE {
                        let dx = kx as isize - 1;
                        let x0 = (-dx).max(0) as usize;
                        let x1 = (w as isize).min(w as isize - dx) as usize;
                        let wv = weight_s[w_base + ky * KERNEL_SIZE + kx];
                        let mut acc = T::zero();
                        for y in y0..y1 {
                            let src = ((y as isize + dy) as usize) * w;
                            let dst = y * w;
                            for x in x0..x1 {
                                let g = g_plane[dst + x];
                                acc += g * in_plane[src + (x as isize + dx) as usize];
                                gi[gi_plane_base + src + (x as isize + dx) as usize] += g * wv;
                            }
                        }
                        gw[w_base + ky * KERNEL_SIZE + kx] = acc;
                    }
                }
            }
        }
    }
    (
        ConvGrads {
            weight: g_weight,
            bias: g_bias,
        },
        g_input,
    )
}

/// Batched convolution backward: parameter gradients summed over the batch
/// in item order, plus the gradient w.r.t. the input.
pub fn conv2d_backward<T: Scalar>(
    input: &Array4<T>,
    weight: &Array4<T>,
    grad_out: &Array4<T>,
) -> (ConvGrads<T>, Array4<T>) {
    let b = input.dim().0;
    let per_item: Vec<(ConvGrads<T>, Array3<T>)> = (0..b)
        .into_par_iter()
        .map(|i| {
            conv2d_backward_single(
                &input.index_axis(Axis(0), i).to_owned(),
                weight,
                &grad_out.index_axis(Axis(0), i).to_owned(),
            )
        })
        .collect();

    let mut g_weight = Array4::<T>::zeros(weight.dim());
    let mut g_bias = Array1::<T>::zeros(weight.dim().0);
    let mut g_input = Array4::<T>::zeros(input.dim());
    for (i, (grads, gi)) in per_item.into_iter().enumerate() {
        g_weight += &grads.weight;
        g_bias += &grads.bias;
        g_input.index_axis_mut(Axis(0), i).assign(&gi);
    }
    (
        ConvGrads {
            weight: g_weight,
            bias: g_bias,
        },
        g_input,
    )
}

/// In-place ReLU.
pub fn relu_forward<T: Scalar>(x: &mut Array4<T>) {
    for v in x.iter_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Backward through ReLU using the forward *output* as the mask
/// (output > 0 iff input > 0).
pub fn relu_backward<T: Scalar>(output: &Array4<T>, grad: &mut Array4<T>) {
    for (g, &o) in grad.iter_mut().zip(output.iter()) {
        if o <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Per-channel batch normalization with learnable scale and shift.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm<T> {
    pub gamma: Array1<T>,
    pub beta: Array1<T>,
    pub running_mean: Array1<T>,
    pub running_var: Array1<T>,
}

/// Cached normalization intermediates for the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache<T> {
    pub xhat: Array4<T>,
    pub inv_std: Array1<T>,
}

/// Variance floor inside the normalization.
pub const BN_EPS: f64 = 1e-5;

/// Exponential-average factor for the running statistics.
pub const BN_MOMENTUM: f64 = 0.1;

impl<T: Scalar> BatchNorm<T> {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            gamma: Array1::from_elem(channels, T::one()),
            beta: Array1::zeros(channels),
            running_mean: Array1::zeros(channels),
            running_var: Array1::from_elem(channels, T::one()),
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    /// Train-mode forward: normalize with batch statistics (biased variance)
    /// and fold them into the running averages.
    pub fn forward_train(&mut self, x: &Array4<T>) -> (Array4<T>, BnCache<T>) {
        let (b, c, h, w) = x.dim();
        let count = T::from_f64((b * h * w) as f64);
        let eps = T::from_f64(BN_EPS);
        let momentum = T::from_f64(BN_MOMENTUM);

        let mut out = Array4::<T>::zeros(x.dim());
        let mut xhat = Array4::<T>::zeros(x.dim());
        let mut inv_std = Array1::<T>::zeros(c);
        for ch in 0..c {
            let mut mean = T::zero();
            for bi in 0..b {
                for y in 0..h {
                    for xx in 0..w {
                        mean += x[(bi, ch, y, xx)];
                    }
                }
            }
            mean /= count;
            let mut var = T::zero();
            for bi in 0..b {
                for y in 0..h {
                    for xx in 0..w {
                        let d = x[(bi, ch, y, xx)] - mean;
                        var += d * d;
                    }
                }
            }
            var /= count;
            let istd = T::one() / (var + eps).sqrt();
            inv_std[ch] = istd;
            let (g, bta) = (self.gamma[ch], self.beta[ch]);
            for bi in 0..b {
                for y in 0..h {
                    for xx in 0..w {
                        let xh = (x[(bi, ch, y, xx)] - mean) * istd;
                        xhat[(bi, ch, y, xx)] = xh;
                        out[(bi, ch, y, xx)] = g * xh + bta;
                    }
                }
            }
            self.running_mean[ch] =
                (T::one() - momentum) * self.running_mean[ch] + momentum * mean;
            self.running_var[ch] = (T::one() - momentum) * self.running_var[ch] + momentum * var;
        }
        (out, BnCache { xhat, inv_std })
    }

    /// Eval-mode forward with the running statistics.
    pub fn forward_eval(&self, x: &Array4<T>) -> Array4<T> {
        let (b, c, h, w) = x.dim();
        let eps = T::from_f64(BN_EPS);
        let mut out = Array4::<T>::zeros(x.dim());
        for ch in 0..c {
            let istd = T::one() / (self.running_var[ch] + eps).sqrt();
            let mean = self.running_mean[ch];
            let (g, bta) = (self.gamma[ch], self.beta[ch]);
            for bi in 0..b {
                for y in 0..h {
                    for xx in 0..w {
                        out[(bi, ch, y, xx)] = g * (x[(bi, ch, y, xx)] - mean) * istd + bta;
                    }
                }
            }
        }
        out
    }

    /// Backward pass; returns (grad_input, grad_gamma, grad_beta).
    pub fn backward(
        &self,
        cache: &BnCache<T>,
        grad_out: &Array4<T>,
    ) -> (Array4<T>, Array1<T>, Array1<T>) {
        let (b, c, h, w) = grad_out.dim();
        let count = T::from_f64((b * h * w) as f64);
        let mut g_gamma = Array1::<T>::zeros(c);
        let mut g_beta = Array1::<T>::zeros(c);
        let mut g_in = Array4::<T>::zeros(grad_out.dim());

        for ch in 0..c {
            let mut sum_g = T::zero();
            let mut sum_gx = T::zero();
            for bi in 0..b {
                for y in 0..h {
                    for xx in 0..w {
                        let g = grad_out[(bi, ch, y, xx)];
                        sum_g += g;
                        sum_gx += g * cache.xhat[(bi, ch, y, xx)];
                    }
                }
            }
            g_beta[ch] = sum_g;
            g_gamma[ch] = sum_gx;
            let scale = self.gamma[ch] * cache.inv_std[ch] / count;
            for bi in 0..b {
                for y in 0..h {
                    for xx in 0..w {
                        let g = grad_out[(bi, ch, y, xx)];
                        let xh = cache.xhat[(bi, ch, y, xx)];
                        g_in[(bi, ch, y, xx)] = scale * (count * g - sum_g - xh * sum_gx);
                    }
                }
            }
        }
        (g_in, g_gamma, g_beta)
    }
}
