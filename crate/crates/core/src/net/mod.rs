//! Policy-value network with from-scratch forward and backward passes.
//!
//! Architecture: four 3x3 convolutional layers (stride 1, zero padding, 64
//! channels, batch normalization, ReLU), a flattening step, one hidden fully
//! connected layer (256 units, ReLU, dropout), and two heads: a policy
//! projection followed by softmax and a value projection followed by tanh.
//!
//! Evaluation-mode forwards are read-only on the weights and safe to share
//! across concurrent searches; training mutates weights and batch-norm
//! running statistics and must be exclusive.

mod checkpoint;
mod gradcheck;
mod layers;
mod loss;
mod train;

pub use checkpoint::{
    load_checkpoint, load_checkpoint_file, load_checkpoint_for_spec, save_checkpoint,
    save_checkpoint_file, CheckpointError, CheckpointMeta,
};
pub use gradcheck::gradient_check;
pub use loss::{loss, LossBreakdown, LossKind, LossTarget, PROB_FLOOR};
pub use train::{train_epochs, Adam, EpochLoss, TrainConfig};

use crate::games::GameSpec;
use layers::*;
use ndarray::{Array1, Array2, Array4, ArrayViewD, ArrayViewMutD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floating-point element type of a network; the framework trains in `f32`
/// and verifies gradients in `f64`.
pub trait Scalar:
    ndarray::NdFloat
    + ndarray::LinalgScalar
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + std::fmt::Display
{
}
impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("input has {found} values, expected {expected} for this game spec")]
    InputShape { expected: usize, found: usize },
    #[error("policy target invalid: {0}")]
    PolicyTarget(String),
    #[error("value target {0} outside [-1, 1]")]
    ValueTarget(f64),
    #[error("training aborted, non-finite loss at {context}")]
    NonFiniteLoss { context: String },
    #[error("no training examples supplied")]
    EmptyExamples,
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Channel and hidden-layer widths; the layer structure itself is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub channels: usize,
    pub hidden: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            channels: 64,
            hidden: 256,
        }
    }
}

pub const INPUT_PLANES: usize = 3;
pub const CONV_LAYERS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Conv<F> {
    pub w: Array4<F>, // (out, in, 3, 3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm<F> {
    pub gamma: Array1<F>,
    pub beta: Array1<F>,
    pub running_mean: Array1<F>,
    pub running_var: Array1<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear<F> {
    pub w: Array2<F>, // (out, in)
    pub b: Array1<F>,
}

/// Network output for a single position: a probability vector over the full
/// action space and a scalar value in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct NetOutput {
    pub policy: Vec<f32>,
    pub value: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<F> {
    spec: GameSpec,
    arch: Architecture,
    pub convs: Vec<Conv<F>>,
    pub bns: Vec<BatchNorm<F>>,
    pub fc1: Linear<F>,
    pub policy_head: Linear<F>,
    pub value_head: Linear<F>,
}

impl<F: Scalar> Network<F> {
    pub fn spec(&self) -> GameSpec {
        self.spec
    }

    pub fn arch(&self) -> Architecture {
        self.arch
    }

    pub fn input_len(&self) -> usize {
        INPUT_PLANES * self.spec.cell_count()
    }

    pub fn action_space(&self) -> usize {
        self.spec.action_space_size()
    }

    fn with_weights(
        spec: GameSpec,
        arch: Architecture,
        mut weight: impl FnMut(usize) -> F,
    ) -> Network<F> {
        let s = spec.size();
        let c = arch.channels;
        let feat = c * s * s;
        let actions = spec.action_space_size();
        let mut convs = Vec::new();
        let mut bns = Vec::new();
        for layer in 0..CONV_LAYERS {
            let c_in = if layer == 0 { INPUT_PLANES } else { c };
            convs.push(Conv {
                w: Array4::from_shape_fn((c, c_in, 3, 3), |_| weight(c_in * 9)),
            });
            bns.push(BatchNorm {
                gamma: Array1::ones(c),
                beta: Array1::zeros(c),
                running_mean: Array1::zeros(c),
                running_var: Array1::ones(c),
            });
        }
        let fc1 = Linear {
            w: Array2::from_shape_fn((arch.hidden, feat), |_| weight(feat)),
            b: Array1::zeros(arch.hidden),
        };
        let policy_head = Linear {
            w: Array2::from_shape_fn((actions, arch.hidden), |_| weight(arch.hidden)),
            b: Array1::zeros(actions),
        };
        // The value projection starts at zero: v = tanh(0) = 0 on any input,
        // so the head cannot saturate before per-example features develop.
        let value_head = Linear {
            w: Array2::zeros((1, arch.hidden)),
            b: Array1::zeros(1),
        };
        Network {
            spec,
            arch,
            convs,
            bns,
            fc1,
            policy_head,
            value_head,
        }
    }

    /// He-initialized random weights.
    pub fn init(spec: GameSpec, arch: Architecture, seed: u64) -> Network<F> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::with_weights(spec, arch, |fan_in| {
            let std = (2.0 / fan_in as f64).sqrt();
            let normal = Normal::new(0.0, std).unwrap();
            F::from_f64(normal.sample(&mut rng)).unwrap()
        })
    }

    /// All-zero weights: uniform policy and value 0 on any input. Useful as
    /// the "uniform network" in search tests.
    pub fn zeroed(spec: GameSpec, arch: Architecture) -> Network<F> {
        let mut net = Self::with_weights(spec, arch, |_| F::zero());
        for bn in &mut net.bns {
            bn.gamma.fill(F::zero());
            bn.running_var.fill(F::one());
        }
        net
    }

    /// Converts the element type, e.g. `f32` weights to an `f64` network for
    /// finite-difference verification.
    pub fn cast<T: Scalar>(&self) -> Network<T> {
        let conv = |a: &Array1<F>| a.mapv(|v| T::from_f64(v.to_f64().unwrap()).unwrap());
        Network {
            spec: self.spec,
            arch: self.arch,
            convs: self
                .convs
                .iter()
                .map(|c| Conv {
                    w: c.w.mapv(|v| T::from_f64(v.to_f64().unwrap()).unwrap()),
                })
                .collect(),
            bns: self
                .bns
                .iter()
                .map(|b| BatchNorm {
                    gamma: conv(&b.gamma),
                    beta: conv(&b.beta),
                    running_mean: conv(&b.running_mean),
                    running_var: conv(&b.running_var),
                })
                .collect(),
            fc1: Linear {
                w: self.fc1.w.mapv(|v| T::from_f64(v.to_f64().unwrap()).unwrap()),
                b: conv(&self.fc1.b),
            },
            policy_head: Linear {
                w: self
                    .policy_head
                    .w
                    .mapv(|v| T::from_f64(v.to_f64().unwrap()).unwrap()),
                b: conv(&self.policy_head.b),
            },
            value_head: Linear {
                w: self
                    .value_head
                    .w
                    .mapv(|v| T::from_f64(v.to_f64().unwrap()).unwrap()),
                b: conv(&self.value_head.b),
            },
        }
    }

    /// Trainable arrays in canonical order, paired with their names.
    pub fn trainable(&self) -> Vec<(&'static str, ArrayViewD<'_, F>)> {
        let mut out: Vec<(&'static str, ArrayViewD<'_, F>)> = Vec::new();
        for (i, (conv, bn)) in self.convs.iter().zip(&self.bns).enumerate() {
            out.push((CONV_W_NAMES[i], conv.w.view().into_dyn()));
            out.push((BN_GAMMA_NAMES[i], bn.gamma.view().into_dyn()));
            out.push((BN_BETA_NAMES[i], bn.beta.view().into_dyn()));
        }
        out.push(("fc1.w", self.fc1.w.view().into_dyn()));
        out.push(("fc1.b", self.fc1.b.view().into_dyn()));
        out.push(("policy.w", self.policy_head.w.view().into_dyn()));
        out.push(("policy.b", self.policy_head.b.view().into_dyn()));
        out.push(("value.w", self.value_head.w.view().into_dyn()));
        out.push(("value.b", self.value_head.b.view().into_dyn()));
        out
    }

    pub fn trainable_mut(&mut self) -> Vec<ArrayViewMutD<'_, F>> {
        let mut out: Vec<ArrayViewMutD<'_, F>> = Vec::new();
        for (conv, bn) in self.convs.iter_mut().zip(&mut self.bns) {
            out.push(conv.w.view_mut().into_dyn());
            out.push(bn.gamma.view_mut().into_dyn());
            out.push(bn.beta.view_mut().into_dyn());
        }
        out.push(self.fc1.w.view_mut().into_dyn());
        out.push(self.fc1.b.view_mut().into_dyn());
        out.push(self.policy_head.w.view_mut().into_dyn());
        out.push(self.policy_head.b.view_mut().into_dyn());
        out.push(self.value_head.w.view_mut().into_dyn());
        out.push(self.value_head.b.view_mut().into_dyn());
        out
    }

    /// Every named array including batch-norm running statistics, in the
    /// order they appear in checkpoints.
    pub fn all_arrays(&self) -> Vec<(&'static str, ArrayViewD<'_, F>)> {
        let mut out: Vec<(&'static str, ArrayViewD<'_, F>)> = Vec::new();
        for (i, (conv, bn)) in self.convs.iter().zip(&self.bns).enumerate() {
            out.push((CONV_W_NAMES[i], conv.w.view().into_dyn()));
            out.push((BN_GAMMA_NAMES[i], bn.gamma.view().into_dyn()));
            out.push((BN_BETA_NAMES[i], bn.beta.view().into_dyn()));
            out.push((BN_MEAN_NAMES[i], bn.running_mean.view().into_dyn()));
            out.push((BN_VAR_NAMES[i], bn.running_var.view().into_dyn()));
        }
        out.push(("fc1.w", self.fc1.w.view().into_dyn()));
        out.push(("fc1.b", self.fc1.b.view().into_dyn()));
        out.push(("policy.w", self.policy_head.w.view().into_dyn()));
        out.push(("policy.b", self.policy_head.b.view().into_dyn()));
        out.push(("value.w", self.value_head.w.view().into_dyn()));
        out.push(("value.b", self.value_head.b.view().into_dyn()));
        out
    }

    pub fn all_arrays_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, F>)> {
        let mut out: Vec<(&'static str, ArrayViewMutD<'_, F>)> = Vec::new();
        for (i, (conv, bn)) in self.convs.iter_mut().zip(&mut self.bns).enumerate() {
            out.push((CONV_W_NAMES[i], conv.w.view_mut().into_dyn()));
            out.push((BN_GAMMA_NAMES[i], bn.gamma.view_mut().into_dyn()));
            out.push((BN_BETA_NAMES[i], bn.beta.view_mut().into_dyn()));
            out.push((BN_MEAN_NAMES[i], bn.running_mean.view_mut().into_dyn()));
            out.push((BN_VAR_NAMES[i], bn.running_var.view_mut().into_dyn()));
        }
        out.push(("fc1.w", self.fc1.w.view_mut().into_dyn()));
        out.push(("fc1.b", self.fc1.b.view_mut().into_dyn()));
        out.push(("policy.w", self.policy_head.w.view_mut().into_dyn()));
        out.push(("policy.b", self.policy_head.b.view_mut().into_dyn()));
        out.push(("value.w", self.value_head.w.view_mut().into_dyn()));
        out.push(("value.b", self.value_head.b.view_mut().into_dyn()));
        out
    }

    pub fn assert_finite(&self) -> Result<(), NetError> {
        for (name, arr) in self.all_arrays() {
            if arr.iter().any(|v| !v.to_f64().unwrap().is_finite()) {
                return Err(NetError::NonFiniteLoss {
                    context: format!("array {name}"),
                });
            }
        }
        Ok(())
    }

    fn check_input(&self, planes: &[f32]) -> Result<(), NetError> {
        if planes.len() != self.input_len() {
            return Err(NetError::InputShape {
                expected: self.input_len(),
                found: planes.len(),
            });
        }
        Ok(())
    }

    fn planes_to_batch(&self, planes: &[f32]) -> Array4<F> {
        let s = self.spec.size();
        Array4::from_shape_fn((1, INPUT_PLANES, s, s), |(_, p, y, x)| {
            F::from_f32(planes[p * s * s + y * s + x]).unwrap()
        })
    }

    /// Deterministic evaluation-mode forward pass for one encoded position.
    pub fn evaluate(&self, planes: &[f32]) -> Result<NetOutput, NetError> {
        self.check_input(planes)?;
        let x = self.planes_to_batch(planes);
        let (_, logits, values) = self.forward_eval_cached(&x);
        Ok(self.output_from(&logits, &values))
    }

    /// Forward pass for one encoded position. Train mode applies dropout with
    /// probability `dropout` and refreshes the batch-norm running statistics,
    /// so it takes `&mut self`; eval mode is deterministic.
    pub fn forward(
        &mut self,
        planes: &[f32],
        mode: Mode,
        dropout: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<NetOutput, NetError> {
        self.check_input(planes)?;
        let x = self.planes_to_batch(planes);
        let (logits, values) = match mode {
            Mode::Eval => {
                let (_, logits, values) = self.forward_eval_cached(&x);
                (logits, values)
            }
            Mode::Train => {
                let (_, logits, values) = self.forward_train_cached(&x, dropout, rng);
                (logits, values)
            }
        };
        Ok(self.output_from(&logits, &values))
    }

    fn output_from(&self, logits: &Array2<F>, values: &Array1<F>) -> NetOutput {
        let probs = softmax_rows(logits);
        NetOutput {
            policy: probs
                .row(0)
                .iter()
                .map(|v| v.to_f32().unwrap())
                .collect(),
            value: values[0].to_f32().unwrap(),
        }
    }

    /// Shared forward pass; returns the cache needed by [`Self::backward`],
    /// raw policy logits (N, A) and tanh values (N).
    pub(crate) fn forward_cached(
        &mut self,
        x: &Array4<F>,
        mode: Mode,
        dropout: f64,
        rng: Option<&mut ChaCha8Rng>,
    ) -> (ForwardCache<F>, Array2<F>, Array1<F>) {
        match mode {
            Mode::Eval => self.forward_eval_cached(x),
            Mode::Train => self.forward_train_cached(x, dropout, rng.expect("train mode needs an rng")),
        }
    }

    pub(crate) fn forward_eval_cached(
        &self,
        x: &Array4<F>,
    ) -> (ForwardCache<F>, Array2<F>, Array1<F>) {
        let (cache, logits, values, _) = self.forward_pass(x, false, None);
        (cache, logits, values)
    }

    pub(crate) fn forward_train_cached(
        &mut self,
        x: &Array4<F>,
        dropout: f64,
        rng: &mut ChaCha8Rng,
    ) -> (ForwardCache<F>, Array2<F>, Array1<F>) {
        let (cache, logits, values, batch_stats) =
            self.forward_pass(x, true, Some((dropout, rng)));
        // Fold this batch's statistics into the running estimates.
        let mom = F::from_f64(layers::BN_MOMENTUM).unwrap();
        let one = F::one();
        for (bn, (mean, var)) in self.bns.iter_mut().zip(batch_stats) {
            ndarray::Zip::from(&mut bn.running_mean)
                .and(&mean)
                .for_each(|r, &m| *r = mom * *r + (one - mom) * m);
            ndarray::Zip::from(&mut bn.running_var)
                .and(&var)
                .for_each(|r, &v| *r = mom * *r + (one - mom) * v);
        }
        (cache, logits, values)
    }

    /// Shared pass. With `batch_stats` the batch-norm layers normalize by the
    /// current batch (train behavior); otherwise by the running estimates.
    /// Returns the per-layer batch statistics so the caller can update the
    /// running estimates.
    #[allow(clippy::type_complexity)]
    fn forward_pass(
        &self,
        x: &Array4<F>,
        batch_stats: bool,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> (
        ForwardCache<F>,
        Array2<F>,
        Array1<F>,
        Vec<(Array1<F>, Array1<F>)>,
    ) {
        let n = x.dim().0;
        let s = self.spec.size();
        let c = self.arch.channels;

        let mut conv_caches = Vec::with_capacity(CONV_LAYERS);
        let mut bn_caches = Vec::with_capacity(CONV_LAYERS);
        let mut relu_outs = Vec::with_capacity(CONV_LAYERS);
        let mut stats = Vec::with_capacity(CONV_LAYERS);
        let mut a = x.clone();
        for layer in 0..CONV_LAYERS {
            let (z, conv_cache) = conv_forward(&self.convs[layer].w, &a);
            let bn = &self.bns[layer];
            let (mean, var) = if batch_stats {
                bn_batch_stats(&z)
            } else {
                (bn.running_mean.clone(), bn.running_var.clone())
            };
            let (y, bn_cache) = bn_apply(&bn.gamma, &bn.beta, &mean, &var, &z, batch_stats);
            stats.push((mean, var));
            let act = relu4(&y);
            conv_caches.push(conv_cache);
            bn_caches.push(bn_cache);
            relu_outs.push(act.clone());
            a = act;
        }

        let flat = a.into_shape_with_order((n, c * s * s)).unwrap();
        let h_pre = linear_forward(&self.fc1.w, &self.fc1.b, &flat);
        let h = relu2(&h_pre);
        let (h_dropped, mask) = match dropout {
            Some((d, rng)) if d > 0.0 => {
                let mask = dropout_mask::<F>(h.dim(), d, rng);
                (&h * &mask, Some(mask))
            }
            _ => (h.clone(), None),
        };
        let logits = linear_forward(&self.policy_head.w, &self.policy_head.b, &h_dropped);
        let value_pre = linear_forward(&self.value_head.w, &self.value_head.b, &h_dropped);
        let values = value_pre.column(0).mapv(|v| v.tanh());

        (
            ForwardCache {
                conv_caches,
                bn_caches,
                relu_outs,
                flat,
                h,
                h_dropped,
                dropout: mask,
                values: values.clone(),
            },
            logits,
            values,
            stats,
        )
    }

    /// Backward pass from head gradients to parameter gradients.
    ///
    /// `dlogits` is dLoss/d(policy logits), `dvalues` is dLoss/d(tanh value).
    pub(crate) fn backward(
        &self,
        cache: &ForwardCache<F>,
        dlogits: &Array2<F>,
        dvalues: &Array1<F>,
    ) -> Gradients<F> {
        let n = dlogits.dim().0;
        let s = self.spec.size();
        let c = self.arch.channels;

        // Through tanh.
        let dvalue_pre = ndarray::Zip::from(dvalues)
            .and(&cache.values)
            .map_collect(|&dv, &v| dv * (F::one() - v * v));
        let dvalue_pre2 = dvalue_pre.insert_axis(ndarray::Axis(1));

        let (dpol_w, dpol_b, dh1) =
            linear_backward(&self.policy_head.w, &cache.h_dropped, dlogits);
        let (dval_w, dval_b, dh2) =
            linear_backward(&self.value_head.w, &cache.h_dropped, &dvalue_pre2);
        let mut dh_dropped = dh1 + dh2;
        if let Some(mask) = &cache.dropout {
            dh_dropped = dh_dropped * mask;
        }
        let dh_pre = relu_mask2(&cache.h, &dh_dropped);
        let (dfc1_w, dfc1_b, dflat) = linear_backward(&self.fc1.w, &cache.flat, &dh_pre);

        let mut da = dflat.into_shape_with_order((n, c, s, s)).unwrap();
        let mut conv_w_grads = vec![Array4::zeros((0, 0, 0, 0)); CONV_LAYERS];
        let mut bn_gamma_grads = vec![Array1::zeros(0); CONV_LAYERS];
        let mut bn_beta_grads = vec![Array1::zeros(0); CONV_LAYERS];
        for layer in (0..CONV_LAYERS).rev() {
            let dz = relu_mask4(&cache.relu_outs[layer], &da);
            let (dgamma, dbeta, dconv_out) =
                bn_backward(&self.bns[layer].gamma, &cache.bn_caches[layer], &dz);
            let (dw, da_prev) =
                conv_backward(&self.convs[layer].w, &cache.conv_caches[layer], &dconv_out);
            conv_w_grads[layer] = dw;
            bn_gamma_grads[layer] = dgamma;
            bn_beta_grads[layer] = dbeta;
            da = da_prev;
        }

        Gradients {
            conv_w: conv_w_grads,
            bn_gamma: bn_gamma_grads,
            bn_beta: bn_beta_grads,
            fc1_w: dfc1_w,
            fc1_b: dfc1_b,
            policy_w: dpol_w,
            policy_b: dpol_b,
            value_w: dval_w,
            value_b: dval_b,
        }
    }
}

const CONV_W_NAMES: [&str; 4] = ["conv1.w", "conv2.w", "conv3.w", "conv4.w"];
const BN_GAMMA_NAMES: [&str; 4] = ["bn1.gamma", "bn2.gamma", "bn3.gamma", "bn4.gamma"];
const BN_BETA_NAMES: [&str; 4] = ["bn1.beta", "bn2.beta", "bn3.beta", "bn4.beta"];
const BN_MEAN_NAMES: [&str; 4] = ["bn1.mean", "bn2.mean", "bn3.mean", "bn4.mean"];
const BN_VAR_NAMES: [&str; 4] = ["bn1.var", "bn2.var", "bn3.var", "bn4.var"];

/// Intermediate activations retained for the backward pass.
pub(crate) struct ForwardCache<F> {
    conv_caches: Vec<ConvCache<F>>,
    bn_caches: Vec<BnCache<F>>,
    relu_outs: Vec<Array4<F>>,
    flat: Array2<F>,
    h: Array2<F>,
    h_dropped: Array2<F>,
    dropout: Option<Array2<F>>,
    pub(crate) values: Array1<F>,
}

/// Parameter gradients in the same layout as [`Network::trainable`].
pub struct Gradients<F> {
    pub conv_w: Vec<Array4<F>>,
    pub bn_gamma: Vec<Array1<F>>,
    pub bn_beta: Vec<Array1<F>>,
    pub fc1_w: Array2<F>,
    pub fc1_b: Array1<F>,
    pub policy_w: Array2<F>,
    pub policy_b: Array1<F>,
    pub value_w: Array2<F>,
    pub value_b: Array1<F>,
}

impl<F: Scalar> Gradients<F> {
    /// Views in the canonical trainable order.
    pub fn views(&self) -> Vec<ArrayViewD<'_, F>> {
        let mut out: Vec<ArrayViewD<'_, F>> = Vec::new();
        for i in 0..CONV_LAYERS {
            out.push(self.conv_w[i].view().into_dyn());
            out.push(self.bn_gamma[i].view().into_dyn());
            out.push(self.bn_beta[i].view().into_dyn());
        }
        out.push(self.fc1_w.view().into_dyn());
        out.push(self.fc1_b.view().into_dyn());
        out.push(self.policy_w.view().into_dyn());
        out.push(self.policy_b.view().into_dyn());
        out.push(self.value_w.view().into_dyn());
        out.push(self.value_b.view().into_dyn());
        out
    }

    pub fn is_finite(&self) -> bool {
        self.views()
            .iter()
            .all(|v| v.iter().all(|x| x.to_f64().unwrap().is_finite()))
    }
}

/// Restricts a policy to the legal actions and renormalizes, equivalent to
/// masking illegal logits at -inf before the softmax. Falls back to uniform
/// over legal actions if the legal mass underflows.
pub fn masked_policy(policy: &[f32], legal: &[bool]) -> Vec<f32> {
    assert_eq!(policy.len(), legal.len());
    let mut out: Vec<f32> = policy
        .iter()
        .zip(legal)
        .map(|(&p, &l)| if l { p } else { 0.0 })
        .collect();
    let sum: f32 = out.iter().sum();
    if sum > 0.0 {
        for v in &mut out {
            *v /= sum;
        }
    } else {
        let count = legal.iter().filter(|&&l| l).count() as f32;
        for (v, &l) in out.iter_mut().zip(legal) {
            *v = if l { 1.0 / count } else { 0.0 };
        }
    }
    out
}

#[cfg(test)]
mod tests;
