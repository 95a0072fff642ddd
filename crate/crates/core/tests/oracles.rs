mod common;

use agod::policy::{argmax, DiffusionSchedule, forward_marginal, softmax, NoiseScaleMode};
use agod::trainer::{new_agod, DiscreteActor, TrainConfig};
use agod::env::EnvConfig;
use agod::seeds::SeedStreams;
use common::*;
use ndarray::Array2;
use proptest::prelude::*;

#[test]
fn actor_gradients_match_finite_differences() {
    let err = actor_gradient_error();
    assert!(err <= 1e-3, "max relative error {err}");
}

#[test]
fn critic_gradients_match_finite_differences() {
    let err = critic_gradient_error();
    assert!(err <= 1e-6, "max relative error {err}");
}

#[test]
fn iterated_transitions_match_closed_form() {
    for t in [1, 3, 5] {
        let z = marginal_z(t, 10_000, 2024 + t as u64);
        assert!(z <= 3.0, "t={t}: |z| = {z}");
    }
}

#[test]
fn closed_form_mean_matches_alpha_bar() {
    let s = DiffusionSchedule::<f64>::vp(5, 0.1, 10.0).unwrap();
    let x0 = [0.8, -0.3];
    let m = forward_marginal(&x0, 3, &s, &[0.0, 0.0]).unwrap();
    assert_eq!(m, vec![0.8 * s.alpha_bar(3).sqrt(), -0.3 * s.alpha_bar(3).sqrt()]);
}

/// Each sample comes from a freshly initialised actor with fresh noise, the
/// setting where initialisation symmetry makes every action equally likely.
#[test]
fn untrained_actor_is_uniform_on_average() {
    let env = EnvConfig::default();
    let cfg = TrainConfig::default();
    let state = Array2::from_elem((1, env.obs_dim()), 0.5);
    let mut noise = rng(6);
    let mut mean = vec![0.0; env.num_asps];
    for k in 0..1000 {
        let agod = new_agod(&cfg, &env, SeedStreams::new(10_000 + k)).unwrap();
        let p = agod.probs(state.view(), &mut noise).unwrap();
        for (m, v) in mean.iter_mut().zip(p.iter()) {
            *m += v / 1000.0;
        }
    }
    for (i, m) in mean.iter().enumerate() {
        assert!((m - 0.05).abs() <= 0.02, "action {i}: mean prob {m}");
    }
}

#[test]
fn squared_and_ddpm_noise_modes_differ_only_in_scale() {
    let s = DiffusionSchedule::<f64>::vp(5, 0.1, 10.0).unwrap();
    for t in 2..=5 {
        let tb = s.tilde_beta(t);
        assert_eq!(s.noise_scale(t, NoiseScaleMode::Squared), (tb / 2.0).powi(2));
        assert_eq!(s.noise_scale(t, NoiseScaleMode::Ddpm), tb.sqrt());
    }
}

proptest! {
    #[test]
    fn greedy_choice_survives_monotone_transforms(x in prop::collection::vec(-5.0f64..5.0, 2..25), k in 0.1f64..4.0, c in -3.0f64..3.0) {
        let moved: Vec<f64> = x.iter().map(|v| (k * v + c).exp()).collect();
        prop_assert_eq!(argmax(&x), argmax(&moved));
        prop_assert_eq!(argmax(&softmax(&x)), argmax(&x));
    }
}

#[test]
fn invariant_suite_holds() {
    for (name, result) in invariant_suite() {
        assert!(result.is_ok(), "{name}: {result:?}");
    }
}
