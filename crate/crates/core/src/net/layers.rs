//! Layer primitives with explicit forward/backward passes: 3x3 same-padding
//! convolution via im2col, batch normalization, fully connected layers,
//! ReLU, dropout and softmax.

use ndarray::{Array1, Array2, Array4, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Scalar;

pub(crate) const BN_EPS: f64 = 1e-5;
pub(crate) const BN_MOMENTUM: f64 = 0.9;

/// Unfolds `x` (N, C, S, S) into a (C*9, N*S*S) matrix of 3x3 patches with
/// zero padding, so convolution becomes one matrix product.
pub(crate) fn im2col<F: Scalar>(x: &Array4<F>) -> Array2<F> {
    let (n, c, s, _) = x.dim();
    let p = s * s;
    let mut cols = Array2::<F>::zeros((c * 9, n * p));
    for ci in 0..c {
        for ky in 0..3 {
            for kx in 0..3 {
                let row = ci * 9 + ky * 3 + kx;
                for ni in 0..n {
                    for y in 0..s {
                        let sy = y as isize + ky as isize - 1;
                        if sy < 0 || sy >= s as isize {
                            continue;
                        }
                        for xx in 0..s {
                            let sx = xx as isize + kx as isize - 1;
                            if sx < 0 || sx >= s as isize {
                                continue;
                            }
                            cols[[row, ni * p + y * s + xx]] = x[[ni, ci, sy as usize, sx as usize]];
                        }
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatter-adds patch gradients back onto the input.
pub(crate) fn col2im<F: Scalar>(dcols: &Array2<F>, n: usize, c: usize, s: usize) -> Array4<F> {
    let p = s * s;
    let mut dx = Array4::<F>::zeros((n, c, s, s));
    for ci in 0..c {
        for ky in 0..3 {
            for kx in 0..3 {
                let row = ci * 9 + ky * 3 + kx;
                for ni in 0..n {
                    for y in 0..s {
                        let sy = y as isize + ky as isize - 1;
                        if sy < 0 || sy >= s as isize {
                            continue;
                        }
                        for xx in 0..s {
                            let sx = xx as isize + kx as isize - 1;
                            if sx < 0 || sx >= s as isize {
                                continue;
                            }
                            dx[[ni, ci, sy as usize, sx as usize]] =
                                dx[[ni, ci, sy as usize, sx as usize]] + dcols[[row, ni * p + y * s + xx]];
                        }
                    }
                }
            }
        }
    }
    dx
}

pub(crate) struct ConvCache<F> {
    pub cols: Array2<F>,
    pub in_channels: usize,
    pub batch: usize,
    pub size: usize,
}

/// Convolution forward: weights (Cout, Cin, 3, 3), stride 1, zero padding.
pub(crate) fn conv_forward<F: Scalar>(w: &Array4<F>, x: &Array4<F>) -> (Array4<F>, ConvCache<F>) {
    let (n, c_in, s, _) = x.dim();
    let c_out = w.dim().0;
    let p = s * s;
    let cols = im2col(x);
    let w2 = w
        .view()
        .into_shape_with_order((c_out, c_in * 9))
        .expect("conv weights are contiguous");
    let out2 = w2.dot(&cols); // (Cout, N*P)
    let out = Array4::from_shape_fn((n, c_out, s, s), |(ni, co, y, xx)| {
        out2[[co, ni * p + y * s + xx]]
    });
    (
        out,
        ConvCache {
            cols,
            in_channels: c_in,
            batch: n,
            size: s,
        },
    )
}

/// Returns (d_weights, d_input).
pub(crate) fn conv_backward<F: Scalar>(
    w: &Array4<F>,
    cache: &ConvCache<F>,
    dout: &Array4<F>,
) -> (Array4<F>, Array4<F>) {
    let (n, c_out, s, _) = dout.dim();
    let p = s * s;
    let dout2 = Array2::from_shape_fn((c_out, n * p), |(co, col)| {
        let ni = col / p;
        let rem = col % p;
        dout[[ni, co, rem / s, rem % s]]
    });
    let dw2 = dout2.dot(&cache.cols.t()); // (Cout, Cin*9)
    let dw = dw2
        .into_shape_with_order((c_out, cache.in_channels, 3, 3))
        .unwrap();
    let w2 = w
        .view()
        .into_shape_with_order((c_out, cache.in_channels * 9))
        .unwrap();
    let dcols = w2.t().dot(&dout2);
    let dx = col2im(&dcols, cache.batch, cache.in_channels, cache.size);
    (dw, dx)
}

pub(crate) struct BnCache<F> {
    /// Normalized input, reused for the gamma gradient in both modes.
    pub x_hat: Array4<F>,
    /// 1/sqrt(var + eps) per channel (batch statistics in train mode,
    /// running statistics in eval mode).
    pub inv_std: Array1<F>,
    pub train_mode: bool,
}

/// Per-channel mean and (biased) variance over the (N, S, S) axes.
pub(crate) fn bn_batch_stats<F: Scalar>(x: &Array4<F>) -> (Array1<F>, Array1<F>) {
    let c = x.dim().1;
    let mut mean = Array1::<F>::zeros(c);
    let mut var = Array1::<F>::zeros(c);
    for ci in 0..c {
        let slice = x.index_axis(Axis(1), ci);
        let m = slice.mean().unwrap();
        mean[ci] = m;
        var[ci] = slice.mapv(|v| (v - m) * (v - m)).mean().unwrap();
    }
    (mean, var)
}

/// Batch-norm forward over the channel axis of (N, C, S, S) with the given
/// statistics. `train_mode` only selects which backward formula applies:
/// through the batch statistics, or treating them as constants.
pub(crate) fn bn_apply<F: Scalar>(
    gamma: &Array1<F>,
    beta: &Array1<F>,
    mean: &Array1<F>,
    var: &Array1<F>,
    x: &Array4<F>,
    train_mode: bool,
) -> (Array4<F>, BnCache<F>) {
    let c = x.dim().1;
    let eps = F::from_f64(BN_EPS).unwrap();
    let inv_std = var.mapv(|v| F::one() / (v + eps).sqrt());
    let mut x_hat = x.clone();
    let mut y = Array4::<F>::zeros(x.raw_dim());
    for ci in 0..c {
        let (g, b, m, is) = (gamma[ci], beta[ci], mean[ci], inv_std[ci]);
        let mut xh = x_hat.index_axis_mut(Axis(1), ci);
        xh.mapv_inplace(|v| (v - m) * is);
        let mut yc = y.index_axis_mut(Axis(1), ci);
        yc.assign(&xh);
        yc.mapv_inplace(|v| g * v + b);
    }
    (
        y,
        BnCache {
            x_hat,
            inv_std,
            train_mode,
        },
    )
}

/// Returns (d_gamma, d_beta, d_input).
pub(crate) fn bn_backward<F: Scalar>(
    gamma: &Array1<F>,
    cache: &BnCache<F>,
    dy: &Array4<F>,
) -> (Array1<F>, Array1<F>, Array4<F>) {
    let (n, c, s, _) = dy.dim();
    let count = F::from_usize(n * s * s).unwrap();
    let mut dgamma = Array1::<F>::zeros(c);
    let mut dbeta = Array1::<F>::zeros(c);
    let mut dx = Array4::<F>::zeros(dy.raw_dim());
    for ci in 0..c {
        let dyc = dy.index_axis(Axis(1), ci);
        let xhc = cache.x_hat.index_axis(Axis(1), ci);
        let sum_dy = dyc.sum();
        let sum_dy_xhat = (&dyc * &xhc).sum();
        dgamma[ci] = sum_dy_xhat;
        dbeta[ci] = sum_dy;
        let scale = gamma[ci] * cache.inv_std[ci];
        let mut dxc = dx.index_axis_mut(Axis(1), ci);
        if cache.train_mode {
            let mean_dy = sum_dy / count;
            let mean_dy_xhat = sum_dy_xhat / count;
            ndarray::Zip::from(&mut dxc)
                .and(&dyc)
                .and(&xhc)
                .for_each(|d, &g, &xh| *d = scale * (g - mean_dy - xh * mean_dy_xhat));
        } else {
            // Running statistics are constants, so the map is affine.
            ndarray::Zip::from(&mut dxc)
                .and(&dyc)
                .for_each(|d, &g| *d = scale * g);
        }
    }
    (dgamma, dbeta, dx)
}

pub(crate) fn relu4<F: Scalar>(x: &Array4<F>) -> Array4<F> {
    x.mapv(|v| if v > F::zero() { v } else { F::zero() })
}

pub(crate) fn relu2<F: Scalar>(x: &Array2<F>) -> Array2<F> {
    x.mapv(|v| if v > F::zero() { v } else { F::zero() })
}

/// Gradient gate for ReLU given the layer *output*.
pub(crate) fn relu_mask4<F: Scalar>(out: &Array4<F>, dy: &Array4<F>) -> Array4<F> {
    let mut dx = dy.clone();
    ndarray::Zip::from(&mut dx)
        .and(out)
        .for_each(|d, &o| {
            if o <= F::zero() {
                *d = F::zero();
            }
        });
    dx
}

pub(crate) fn relu_mask2<F: Scalar>(out: &Array2<F>, dy: &Array2<F>) -> Array2<F> {
    let mut dx = dy.clone();
    ndarray::Zip::from(&mut dx)
        .and(out)
        .for_each(|d, &o| {
            if o <= F::zero() {
                *d = F::zero();
            }
        });
    dx
}

/// Inverted dropout mask: entries are 0 with probability `d`, else 1/(1-d).
pub(crate) fn dropout_mask<F: Scalar>(
    shape: (usize, usize),
    d: f64,
    rng: &mut ChaCha8Rng,
) -> Array2<F> {
    let keep_scale = F::from_f64(1.0 / (1.0 - d)).unwrap();
    let mut mask = Array2::<F>::zeros(shape);
    for v in mask.iter_mut() {
        *v = if rng.random::<f64>() < d {
            F::zero()
        } else {
            keep_scale
        };
    }
    mask
}

/// Fully connected forward: weights (out, in), y = x W^T + b.
pub(crate) fn linear_forward<F: Scalar>(
    w: &Array2<F>,
    b: &Array1<F>,
    x: &Array2<F>,
) -> Array2<F> {
    x.dot(&w.t()) + b
}

/// Returns (d_weights, d_bias, d_input).
pub(crate) fn linear_backward<F: Scalar>(
    w: &Array2<F>,
    x: &Array2<F>,
    dy: &Array2<F>,
) -> (Array2<F>, Array1<F>, Array2<F>) {
    let dw = dy.t().dot(x);
    let db = dy.sum_axis(Axis(0));
    let dx = dy.dot(w);
    (dw, db, dx)
}

/// Numerically stable row-wise softmax.
pub(crate) fn softmax_rows<F: Scalar>(logits: &Array2<F>) -> Array2<F> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(F::neg_infinity(), F::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}
