//! Training targets built from the policy cross-entropy and the value
//! squared error.
//!
//! With `l_p = -sum_a pi(a) * ln p(a)` and `l_v = (v - z)^2`, the selectable
//! targets are the components alone, their sum, their product, and the
//! lambda-weighted sum `lambda * l_p + (1 - lambda) * l_v`. All four are
//! measured every batch; only the selected one is minimized.

use super::{NetError, Scalar};
use serde::{Deserialize, Serialize};

/// Probabilities are clamped at this floor inside the log so sparse policy
/// targets cannot produce an infinite cross-entropy.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    PolicyOnly,
    ValueOnly,
    Sum,
    Product,
    WeightedSum,
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::PolicyOnly => "policy_only",
            LossKind::ValueOnly => "value_only",
            LossKind::Sum => "sum",
            LossKind::Product => "product",
            LossKind::WeightedSum => "weighted_sum",
        }
    }
}

/// Loss-target selector; `lambda` is only consulted by [`LossKind::WeightedSum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTarget {
    pub kind: LossKind,
    pub lambda: f64,
}

impl LossTarget {
    pub fn policy_only() -> Self {
        LossTarget {
            kind: LossKind::PolicyOnly,
            lambda: 0.5,
        }
    }

    pub fn value_only() -> Self {
        LossTarget {
            kind: LossKind::ValueOnly,
            lambda: 0.5,
        }
    }

    pub fn sum() -> Self {
        LossTarget {
            kind: LossKind::Sum,
            lambda: 0.5,
        }
    }

    pub fn product() -> Self {
        LossTarget {
            kind: LossKind::Product,
            lambda: 0.5,
        }
    }

    pub fn weighted(lambda: f64) -> Self {
        LossTarget {
            kind: LossKind::WeightedSum,
            lambda,
        }
    }

    /// Combined scalar for given component values.
    pub fn combine(&self, lp: f64, lv: f64) -> f64 {
        match self.kind {
            LossKind::PolicyOnly => lp,
            LossKind::ValueOnly => lv,
            LossKind::Sum => lp + lv,
            LossKind::Product => lp * lv,
            LossKind::WeightedSum => self.lambda * lp + (1.0 - self.lambda) * lv,
        }
    }

    /// Partial derivatives (d/d lp, d/d lv) of the combined loss at the given
    /// component values; the product rule makes these value-dependent.
    pub fn coefficients(&self, lp: f64, lv: f64) -> (f64, f64) {
        match self.kind {
            LossKind::PolicyOnly => (1.0, 0.0),
            LossKind::ValueOnly => (0.0, 1.0),
            LossKind::Sum => (1.0, 1.0),
            LossKind::Product => (lv, lp),
            LossKind::WeightedSum => (self.lambda, 1.0 - self.lambda),
        }
    }
}

/// All component and combined values for one example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
}

pub(crate) fn validate_targets(pi: &[f32], z: f64) -> Result<(), NetError> {
    let sum: f64 = pi.iter().map(|&p| p as f64).sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(NetError::PolicyTarget(format!(
            "policy target sums to {sum}, expected 1"
        )));
    }
    if pi.iter().any(|&p| p < 0.0) {
        return Err(NetError::PolicyTarget("negative policy entry".to_string()));
    }
    if !(-1.0..=1.0).contains(&z) {
        return Err(NetError::ValueTarget(z));
    }
    Ok(())
}

/// Cross-entropy and squared-error components from raw policy logits and the
/// tanh value output, in generic precision.
pub(crate) fn components_from_logits<F: Scalar>(
    logits: &[F],
    value: F,
    pi: &[F],
    z: F,
) -> (f64, f64) {
    // Stable log-softmax.
    let max = logits.iter().cloned().fold(F::neg_infinity(), F::max);
    let log_sum: f64 = logits
        .iter()
        .map(|&l| (l - max).to_f64().unwrap().exp())
        .sum::<f64>()
        .ln();
    let mut lp = 0.0;
    for (&l, p) in logits.iter().zip(pi) {
        let pt = p.to_f64().unwrap();
        if pt > 0.0 {
            let logprob = ((l - max).to_f64().unwrap() - log_sum).max(PROB_FLOOR.ln());
            lp -= pt * logprob;
        }
    }
    let diff = value.to_f64().unwrap() - z.to_f64().unwrap();
    (lp, diff * diff)
}

/// Loss of one example under the selected target, with the component
/// breakdown. `logits` are the raw policy head outputs, `value` the tanh
/// output. The policy target must be a probability vector and `z` in [-1, 1].
pub fn loss(
    logits: &[f32],
    value: f32,
    pi: &[f32],
    z: f32,
    target: LossTarget,
) -> Result<LossBreakdown, NetError> {
    if logits.len() != pi.len() {
        return Err(NetError::PolicyTarget(format!(
            "policy target length {} does not match logits length {}",
            pi.len(),
            logits.len()
        )));
    }
    validate_targets(pi, z as f64)?;
    let (lp, lv) = components_from_logits(logits, value, pi, z);
    Ok(LossBreakdown {
        total: target.combine(lp, lv),
        policy: lp,
        value: lv,
    })
}
