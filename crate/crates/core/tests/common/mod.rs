#![allow(dead_code)]

use agod::env::{sample_fleet, AspEnv, EnvConfig};
use agod::nn::{param_distance, soft_update, ParamSet};
use agod::policy::{entropy_of, softmax, ActorNetwork, ActorShape, Agod, DiffusionSchedule, NoiseScaleMode};
use agod::seeds::SeedStreams;
use agod::trainer::{
    actor_loss_grads, critic_loss_grads, critic_network, new_agod, train, ReplayBuffer, TrainConfig, TrainContext,
    Transition,
};
use ndarray::Array2;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Max relative error between analytic and central-difference gradients
/// of `loss` over every parameter of `model`.
pub fn fd_max_rel_err<P: ParamSet<f64> + Clone>(
    model: &P,
    analytic: &[Vec<f64>],
    h: f64,
    loss: impl Fn(&P) -> f64,
) -> f64 {
    let mut worst = 0.0_f64;
    let sizes: Vec<usize> = model.params().iter().map(|p| p.len()).collect();
    for (b, &n) in sizes.iter().enumerate() {
        for (i, &a) in analytic[b].iter().enumerate().take(n) {
            let mut plus = model.clone();
            plus.params_mut()[b][i] += h;
            let mut minus = model.clone();
            minus.params_mut()[b][i] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            worst = worst.max(rel_err(a, numeric));
        }
    }
    worst
}

pub fn toy_agod(seed: u64) -> Agod<f64> {
    let shape = ActorShape {
        actions: 4,
        state_dim: 3,
        hidden: 4,
        time_dim: 4,
        time_hidden: 4,
    };
    let actor = ActorNetwork::new(shape, &mut rng(seed));
    Agod::new(actor, DiffusionSchedule::vp(5, 0.1, 10.0).unwrap(), NoiseScaleMode::Squared)
}

/// Actor loss through the full five-step chain with the noise held fixed.
pub fn actor_gradient_error() -> f64 {
    let agod = toy_agod(11);
    let mut r = rng(12);
    let states = Array2::from_shape_simple_fn((3, 3), || r.random::<f64>());
    let q = Array2::from_shape_simple_fn((3, 4), || r.random::<f64>() * 4.0 - 2.0);
    let alpha = 0.05;
    let obj = actor_loss_grads(&agod, states.view(), &q, alpha, &mut rng(13)).unwrap();
    fd_max_rel_err(&agod, &obj.grads, 1e-5, |a| {
        actor_loss_grads(a, states.view(), &q, alpha, &mut rng(13)).unwrap().loss
    })
}

pub fn critic_gradient_error() -> f64 {
    let critic = critic_network(3, 4, 4, &mut rng(21));
    let mut r = rng(22);
    let states = Array2::from_shape_simple_fn((6, 3), || r.random::<f64>());
    let actions: Vec<usize> = (0..6).map(|_| r.random_range(0..4)).collect();
    let targets: Vec<f64> = (0..6).map(|_| r.random::<f64>() * 3.0).collect();
    let (_, grads) = critic_loss_grads(&critic, states.view(), &actions, &targets).unwrap();
    fd_max_rel_err(&critic, &grads, 1e-5, |c| {
        critic_loss_grads(c, states.view(), &actions, &targets).unwrap().0
    })
}

/// Largest |z| of the per-component sample mean and variance after `t`
/// single-step forward transitions, measured against the closed-form
/// marginal.
pub fn marginal_z(t: usize, samples: usize, seed: u64) -> f64 {
    let s = DiffusionSchedule::<f64>::vp(5, 0.1, 10.0).unwrap();
    let x0 = [0.8, -0.3, 1.5, 0.0];
    let mut r = rng(seed);
    let mut sum = [0.0; 4];
    let mut sq = [0.0; 4];
    let mut draws = vec![[0.0; 4]; samples];
    for d in draws.iter_mut() {
        let mut x = x0;
        for k in 1..=t {
            let b = s.beta(k);
            for v in x.iter_mut() {
                let e: f64 = r.sample(StandardNormal);
                *v = (1.0 - b).sqrt() * *v + b.sqrt() * e;
            }
        }
        *d = x;
        for c in 0..4 {
            sum[c] += x[c];
        }
    }
    let n = samples as f64;
    let means: Vec<f64> = sum.iter().map(|s| s / n).collect();
    for d in &draws {
        for c in 0..4 {
            sq[c] += (d[c] - means[c]).powi(2);
        }
    }
    let ab = s.alpha_bar(t);
    let var = 1.0 - ab;
    let mut worst = 0.0_f64;
    for c in 0..4 {
        let mu = ab.sqrt() * x0[c];
        let z_mean = (means[c] - mu) / (var / n).sqrt();
        let v_hat = sq[c] / (n - 1.0);
        let z_var = (v_hat - var) / (var * (2.0 / (n - 1.0)).sqrt());
        worst = worst.max(z_mean.abs()).max(z_var.abs());
    }
    worst
}

fn tiny_cfg() -> (EnvConfig, TrainConfig) {
    let env = EnvConfig {
        num_asps: 4,
        num_tasks: 30,
        episode_len: 30,
        ..EnvConfig::default()
    };
    let cfg = TrainConfig {
        train_steps: 3,
        collect_per_step: 20,
        batch_size: 16,
        hidden: 8,
        ..TrainConfig::default()
    };
    (env, cfg)
}

fn run_prop<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Named property checks over the cross-module invariants.
pub fn invariant_suite() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "schedule monotonicity",
            run_prop(64, (1usize..30, 0.01f64..1.0, 0.5f64..20.0), |(steps, lo, span)| {
                let s = DiffusionSchedule::<f64>::vp(steps, lo, lo + span).unwrap();
                for t in 1..=steps {
                    prop_assert!(s.alpha_bar(t) < s.alpha_bar(t - 1));
                    if t > 1 {
                        prop_assert!(s.beta(t) > s.beta(t - 1));
                    }
                }
                Ok(())
            }),
        ),
        (
            "resource conservation",
            run_prop(24, (any::<u64>(), any::<u64>(), any::<u64>()), |(f, w, a)| {
                let cfg = EnvConfig {
                    num_tasks: 80,
                    episode_len: 80,
                    arrival_rate: 0.02,
                    ..EnvConfig::default()
                };
                let mut env = AspEnv::new(cfg.clone(), sample_fleet(&cfg, &mut rng(f))).unwrap();
                env.reset(&mut rng(w)).unwrap();
                let mut r = rng(a);
                while !env.is_done() {
                    env.step(r.random_range(0..cfg.num_asps)).unwrap();
                    for s in env.states() {
                        let held: u32 = s.running.iter().map(|t| t.steps).sum();
                        prop_assert!(held <= s.capacity);
                        prop_assert_eq!(s.available(), s.capacity - held);
                    }
                    let st = env.stats();
                    prop_assert_eq!(st.finished + st.crashed + env.running_count(), st.arrived);
                }
                Ok(())
            }),
        ),
        (
            "replay fifo",
            run_prop(64, (1usize..20, 0usize..60), |(cap, n)| {
                let mut buf = ReplayBuffer::new(cap).unwrap();
                for i in 0..n {
                    buf.store(Transition {
                        state: vec![i as f64],
                        action: 0,
                        next_state: vec![0.0],
                        reward: i as f64,
                        done: false,
                    });
                }
                let kept: Vec<f64> = buf.iter().map(|t| t.reward).collect();
                let expect: Vec<f64> = (n.saturating_sub(cap)..n).map(|i| i as f64).collect();
                prop_assert_eq!(kept, expect);
                Ok(())
            }),
        ),
        (
            "target-lag contraction",
            run_prop(32, (any::<u64>(), 0.001f64..1.0), |(seed, tau)| {
                let online = toy_agod(seed);
                let mut target = toy_agod(seed.wrapping_add(1));
                let before = param_distance(&online, &target);
                soft_update(&online, &mut target, tau);
                let after = param_distance(&online, &target);
                prop_assert!((after - (1.0 - tau) * before).abs() <= 1e-9 * before.max(1.0));
                Ok(())
            }),
        ),
        (
            "softmax normalisation",
            run_prop(256, prop::collection::vec(-800.0f64..800.0, 1..40), |x| {
                let p = softmax(&x);
                prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                Ok(())
            }),
        ),
        (
            "entropy bounds",
            run_prop(256, prop::collection::vec(-50.0f64..50.0, 1..40), |x| {
                let p = softmax(&x);
                let h = entropy_of(&p);
                prop_assert!(h >= -1e-12 && h <= (p.len() as f64).ln() + 1e-12);
                Ok(())
            }),
        ),
        (
            "bit-identical reruns",
            run_prop(3, any::<u64>(), |seed| {
                let (env, cfg) = tiny_cfg();
                let once = || {
                    let streams = SeedStreams::new(seed);
                    let ctx = TrainContext::new(env.clone(), 1, streams).unwrap();
                    let actor = new_agod(&cfg, &env, streams).unwrap();
                    let out = train(&cfg, &ctx, actor, &mut |_| Ok(())).unwrap();
                    let bits: Vec<u64> = out.actor.params().iter().flat_map(|p| p.iter().map(|v| v.to_bits())).collect();
                    (out.rows, bits)
                };
                prop_assert_eq!(once(), once());
                Ok(())
            }),
        ),
    ]
}
