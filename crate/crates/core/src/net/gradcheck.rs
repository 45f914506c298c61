//! Finite-difference verification of the analytic gradients.

use super::loss::{components_from_logits, LossTarget};
use super::train::{batch_arrays, batch_loss_and_grads};
use super::{Mode, Network};
use crate::selfplay::TrainingExample;
use ndarray::Array4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Compares the analytic gradient of the selected loss against central
/// finite differences on `samples` randomly chosen trainable weights and
/// returns the worst relative error observed.
///
/// Runs in eval mode (dropout disabled, batch norm on its running
/// statistics) and in f64 regardless of the network's element type, so the
/// check verifies the calculus rather than rounding. The relative error of a
/// coordinate is |fd - analytic| / max(|fd|, |analytic|, 1e-6).
pub fn gradient_check(
    net: &Network<f32>,
    example: &TrainingExample,
    target: LossTarget,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut net64: Network<f64> = net.cast();
    let (x, pis, zs) = batch_arrays::<f64>(
        &[example],
        net64.input_len(),
        net64.action_space(),
        net64.spec().size(),
    );

    let (_, analytic) =
        batch_loss_and_grads(&mut net64, &x, &pis, &zs, target, Mode::Eval, 0.0, None);
    let analytic_flat: Vec<Vec<f64>> = analytic
        .views()
        .iter()
        .map(|v| v.iter().cloned().collect())
        .collect();

    let sizes: Vec<usize> = analytic_flat.iter().map(|v| v.len()).collect();
    let total: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < samples.min(total) {
        picked.insert(rng.random_range(0..total));
    }

    let pi64: Vec<f64> = pis.row(0).iter().cloned().collect();
    let z64 = zs[0];
    let mut worst: f64 = 0.0;
    for flat_idx in picked {
        let (array_idx, offset) = locate(&sizes, flat_idx);
        let analytic_g = analytic_flat[array_idx][offset];
        let l_plus = perturbed_loss(&mut net64, array_idx, offset, epsilon, &x, &pi64, z64, target);
        let l_minus =
            perturbed_loss(&mut net64, array_idx, offset, -epsilon, &x, &pi64, z64, target);
        let fd = (l_plus - l_minus) / (2.0 * epsilon);
        let rel = (fd - analytic_g).abs() / fd.abs().max(analytic_g.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

fn locate(sizes: &[usize], mut idx: usize) -> (usize, usize) {
    for (i, &len) in sizes.iter().enumerate() {
        if idx < len {
            return (i, idx);
        }
        idx -= len;
    }
    unreachable!("index out of range")
}

#[allow(clippy::too_many_arguments)]
fn perturbed_loss(
    net: &mut Network<f64>,
    array_idx: usize,
    offset: usize,
    delta: f64,
    x: &Array4<f64>,
    pi: &[f64],
    z: f64,
    target: LossTarget,
) -> f64 {
    {
        let mut params = net.trainable_mut();
        let slice = params[array_idx].as_slice_mut().unwrap();
        slice[offset] += delta;
    }
    let (_, logits, values) = net.forward_eval_cached(x);
    let (lp, lv) = components_from_logits(logits.row(0).as_slice().unwrap(), values[0], pi, z);
    {
        let mut params = net.trainable_mut();
        let slice = params[array_idx].as_slice_mut().unwrap();
        slice[offset] -= delta;
    }
    target.combine(lp, lv)
}
