//! Network training behavior beyond the unit tests: loss-identity
//! properties, gradient verification for every target, and optimizer sanity.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallzero_core::games::{GameKind, GameSpec};
use smallzero_core::net::{
    gradient_check, loss, train_epochs, Architecture, LossTarget, Network, TrainConfig,
};
use smallzero_core::selfplay::TrainingExample;

fn one_hot_example(spec: GameSpec, seed: u64) -> TrainingExample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions = spec.action_space_size();
    let mut pi = vec![0.0f32; actions];
    pi[rng.random_range(0..actions)] = 1.0;
    TrainingExample {
        input: (0..3 * spec.cell_count()).map(|_| rng.random::<f32>()).collect(),
        pi,
        z: if rng.random::<bool>() { 1.0 } else { -1.0 },
    }
}

#[test]
fn gradients_match_finite_differences_for_all_targets() {
    let spec = GameSpec::new(GameKind::ConnectFour, 5).unwrap();
    let net: Network<f32> = Network::init(spec, Architecture::default(), 51);
    let example = one_hot_example(spec, 9);
    for target in [
        LossTarget::policy_only(),
        LossTarget::value_only(),
        LossTarget::sum(),
        LossTarget::product(),
        LossTarget::weighted(0.3),
    ] {
        let worst = gradient_check(&net, &example, target, 1e-4, 80, 1234);
        assert!(
            worst < 1e-3,
            "target {:?}: worst relative error {worst}",
            target.kind
        );
    }
}

#[test]
fn optimizer_overfits_a_small_batch() {
    // 32 random examples with one-hot policy targets driven to a combined
    // loss below 0.1 within 500 epochs.
    let spec = GameSpec::new(GameKind::Gobang, 5).unwrap();
    let mut net: Network<f32> = Network::init(spec, Architecture::default(), 99);
    let examples: Vec<TrainingExample> = (0..32).map(|i| one_hot_example(spec, 1000 + i)).collect();
    let cfg = TrainConfig {
        epochs: 500,
        batch_size: 8,
        learning_rate: 0.01,
        dropout: 0.0,
    };
    let trace = train_epochs(
        &mut net,
        &examples,
        &cfg,
        LossTarget::sum(),
        &mut ChaCha8Rng::seed_from_u64(3),
    )
    .unwrap();
    let final_loss = trace.last().unwrap().total;
    assert!(
        final_loss < 0.1,
        "expected overfit below 0.1, got {final_loss} (first epoch {})",
        trace[0].total
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The combination identities: sum, product and the weighted endpoints,
    /// evaluated through the public loss operation on random tuples.
    #[test]
    fn loss_identities_hold(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(2usize..30);
        let logits: Vec<f32> = (0..k).map(|_| rng.random::<f32>() * 8.0 - 4.0).collect();
        let mut pi: Vec<f32> = (0..k).map(|_| rng.random::<f32>()).collect();
        let sum: f32 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= sum);
        let v = rng.random::<f32>() * 2.0 - 1.0;
        let z = rng.random::<f32>() * 2.0 - 1.0;
        let lambda = rng.random::<f64>();

        let lp = loss(&logits, v, &pi, z, LossTarget::policy_only()).unwrap();
        let lv = loss(&logits, v, &pi, z, LossTarget::value_only()).unwrap();
        let l_sum = loss(&logits, v, &pi, z, LossTarget::sum()).unwrap();
        let l_prod = loss(&logits, v, &pi, z, LossTarget::product()).unwrap();
        let l_w = loss(&logits, v, &pi, z, LossTarget::weighted(lambda)).unwrap();
        let l_w1 = loss(&logits, v, &pi, z, LossTarget::weighted(1.0)).unwrap();
        let l_w0 = loss(&logits, v, &pi, z, LossTarget::weighted(0.0)).unwrap();

        prop_assert!((l_sum.total - (lp.total + lv.total)).abs() < 1e-9);
        prop_assert!((l_prod.total - lp.total * lv.total).abs() < 1e-9);
        prop_assert!((l_w.total - (lambda * lp.total + (1.0 - lambda) * lv.total)).abs() < 1e-9);
        prop_assert!((l_w1.total - lp.total).abs() < 1e-12);
        prop_assert!((l_w0.total - lv.total).abs() < 1e-12);
        // Components are identical regardless of the selected target.
        prop_assert_eq!(lp.policy, l_prod.policy);
        prop_assert_eq!(lv.value, l_sum.value);
    }
}
