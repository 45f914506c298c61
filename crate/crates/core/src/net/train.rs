//! Minibatch training: shuffled epochs, adaptive-moment updates, per-epoch
//! loss traces.

use super::loss::{components_from_logits, validate_targets, LossBreakdown, LossTarget};
use super::{Gradients, Mode, NetError, Network, Scalar};
use crate::config::HyperParams;
use crate::selfplay::TrainingExample;
use ndarray::{Array1, Array2, Array4, ArrayD};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Epochs per call (`ep`).
    pub epochs: u64,
    /// Minibatch size (`bs`).
    pub batch_size: usize,
    /// Learning rate (`lr`).
    pub learning_rate: f64,
    /// Dropout probability (`d`).
    pub dropout: f64,
}

impl TrainConfig {
    pub fn from_params(params: &HyperParams) -> TrainConfig {
        TrainConfig {
            epochs: params.epochs,
            batch_size: params.batch_size as usize,
            learning_rate: params.learning_rate,
            dropout: params.dropout,
        }
    }
}

/// Mean losses over one epoch's minibatches: the minimized total plus both
/// measured components.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpochLoss {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
}

/// Adaptive moment estimation with moment coefficients (0.9, 0.999) and
/// epsilon 1e-8.
pub struct Adam<F> {
    lr: f64,
    step: u64,
    m: Vec<ArrayD<F>>,
    v: Vec<ArrayD<F>>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl<F: Scalar> Adam<F> {
    pub fn new(net: &Network<F>, lr: f64) -> Adam<F> {
        let zeros: Vec<ArrayD<F>> = net
            .trainable()
            .iter()
            .map(|(_, view)| ArrayD::zeros(view.raw_dim()))
            .collect();
        Adam {
            lr,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step(&mut self, net: &mut Network<F>, grads: &Gradients<F>) {
        self.step += 1;
        let b1 = F::from_f64(ADAM_BETA1).unwrap();
        let b2 = F::from_f64(ADAM_BETA2).unwrap();
        let eps = F::from_f64(ADAM_EPS).unwrap();
        let one = F::one();
        let corr1 = F::from_f64(1.0 - ADAM_BETA1.powi(self.step as i32)).unwrap();
        let corr2 = F::from_f64(1.0 - ADAM_BETA2.powi(self.step as i32)).unwrap();
        let lr = F::from_f64(self.lr).unwrap();
        for (((mut param, grad), m), v) in net
            .trainable_mut()
            .into_iter()
            .zip(grads.views())
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            ndarray::Zip::from(&mut param)
                .and(&grad)
                .and(&mut *m)
                .and(&mut *v)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    let m_hat = *m / corr1;
                    let v_hat = *v / corr2;
                    *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
                });
        }
    }
}

/// Assembles example tensors for one batch.
pub(crate) fn batch_arrays<F: Scalar>(
    examples: &[&TrainingExample],
    input_len: usize,
    actions: usize,
    size: usize,
) -> (Array4<F>, Array2<F>, Array1<F>) {
    let n = examples.len();
    debug_assert!(examples.iter().all(|e| e.input.len() == input_len));
    let x = Array4::from_shape_fn((n, super::INPUT_PLANES, size, size), |(i, p, y, xx)| {
        F::from_f32(examples[i].input[p * size * size + y * size + xx]).unwrap()
    });
    let pi = Array2::from_shape_fn((n, actions), |(i, a)| {
        F::from_f32(examples[i].pi[a]).unwrap()
    });
    let z = Array1::from_shape_fn(n, |i| F::from_f32(examples[i].z).unwrap());
    (x, pi, z)
}

/// Mean loss and parameter gradients of one batch under `target`.
///
/// Only the selected target is differentiated; both components are measured.
pub(crate) fn batch_loss_and_grads<F: Scalar>(
    net: &mut Network<F>,
    x: &Array4<F>,
    pis: &Array2<F>,
    zs: &Array1<F>,
    target: LossTarget,
    mode: Mode,
    dropout: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> (LossBreakdown, Gradients<F>) {
    let n = x.dim().0;
    let (cache, logits, values) = net.forward_cached(x, mode, dropout, rng);
    let probs = super::layers::softmax_rows(&logits);

    let inv_n = 1.0 / n as f64;
    let mut sum_lp = 0.0;
    let mut sum_lv = 0.0;
    let mut sum_total = 0.0;
    let mut dlogits = Array2::<F>::zeros(logits.raw_dim());
    let mut dvalues = Array1::<F>::zeros(n);
    for i in 0..n {
        let row = logits.row(i);
        let (lp, lv) = components_from_logits(
            row.as_slice().unwrap(),
            values[i],
            pis.row(i).as_slice().unwrap(),
            zs[i],
        );
        sum_lp += lp;
        sum_lv += lv;
        sum_total += target.combine(lp, lv);
        let (alpha, beta) = target.coefficients(lp, lv);
        let alpha = F::from_f64(alpha * inv_n).unwrap();
        let beta = F::from_f64(beta * inv_n).unwrap();
        let two = F::from_f64(2.0).unwrap();
        for a in 0..logits.dim().1 {
            dlogits[[i, a]] = alpha * (probs[[i, a]] - pis[[i, a]]);
        }
        dvalues[i] = beta * two * (values[i] - zs[i]);
    }

    let grads = net.backward(&cache, &dlogits, &dvalues);
    (
        LossBreakdown {
            total: sum_total * inv_n,
            policy: sum_lp * inv_n,
            value: sum_lv * inv_n,
        },
        grads,
    )
}

/// Trains for `cfg.epochs` epochs over `examples`: each epoch shuffles the
/// examples and iterates ceil(count / bs) minibatches of adaptive-moment
/// updates. Returns the per-epoch mean loss trace.
///
/// Fixed seed, examples and config give a bit-identical weight trajectory in
/// a single-threaded run.
pub fn train_epochs(
    net: &mut Network<f32>,
    examples: &[TrainingExample],
    cfg: &TrainConfig,
    target: LossTarget,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<EpochLoss>, NetError> {
    if examples.is_empty() {
        return Err(NetError::EmptyExamples);
    }
    let input_len = net.input_len();
    let actions = net.action_space();
    for (i, ex) in examples.iter().enumerate() {
        if ex.input.len() != input_len {
            return Err(NetError::InputShape {
                expected: input_len,
                found: ex.input.len(),
            });
        }
        if ex.pi.len() != actions {
            return Err(NetError::PolicyTarget(format!(
                "example {i}: policy length {} != action space {actions}",
                ex.pi.len()
            )));
        }
        validate_targets(&ex.pi, ex.z as f64)?;
    }

    let size = net.spec().size();
    let mut adam = Adam::new(net, cfg.learning_rate);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs as usize);
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        let mut weighted = (0.0, 0.0, 0.0);
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let batch: Vec<&TrainingExample> = chunk.iter().map(|&i| &examples[i]).collect();
            let (x, pis, zs) = batch_arrays::<f32>(&batch, input_len, actions, size);
            let (breakdown, grads) = batch_loss_and_grads(
                net,
                &x,
                &pis,
                &zs,
                target,
                Mode::Train,
                cfg.dropout,
                Some(rng),
            );
            if !breakdown.total.is_finite() || !grads.is_finite() {
                return Err(NetError::NonFiniteLoss {
                    context: format!("epoch {epoch}, batch of {}", batch.len()),
                });
            }
            adam.step(net, &grads);
            weighted.0 += breakdown.total * batch.len() as f64;
            weighted.1 += breakdown.policy * batch.len() as f64;
            weighted.2 += breakdown.value * batch.len() as f64;
            seen += batch.len();
        }
        trace.push(EpochLoss {
            total: weighted.0 / seen as f64,
            policy: weighted.1 / seen as f64,
            value: weighted.2 / seen as f64,
        });
    }
    net.assert_finite()?;
    Ok(trace)
}
