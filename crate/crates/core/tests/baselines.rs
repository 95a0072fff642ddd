mod common;

use agod::baselines::{DecisionView, Policy, PolicyName, ProphetPolicy, RoundRobinPolicy};
use agod::env::{sample_fleet, AspEnv, EnvConfig};
use agod::harness::evaluate_heuristic;
use agod::seeds::SeedStreams;
use agod::trainer::TrainContext;
use common::rng;
use proptest::prelude::*;
use rand::Rng;

fn eval(policy: PolicyName, seed: u64) -> agod::trainer::EvalMetrics {
    let ctx = TrainContext::new(EnvConfig::default(), 1, SeedStreams::new(seed)).unwrap();
    evaluate_heuristic(policy, &ctx).unwrap()
}

#[test]
fn prophet_obtains_the_most_utility() {
    for seed in 1..=3 {
        let prophet = eval(PolicyName::Prophet, seed).obtained_utility;
        for p in [PolicyName::Random, PolicyName::RoundRobin, PolicyName::CrashAvoid] {
            let other = eval(p, seed).obtained_utility;
            assert!(prophet >= other, "seed {seed}: prophet {prophet} < {p} {other}");
        }
    }
}

#[test]
fn crash_avoid_never_crashes_on_default_workloads() {
    for seed in 1..=5 {
        let m = eval(PolicyName::CrashAvoid, seed);
        assert_eq!(m.crashed_rate, 0.0, "seed {seed}");
    }
}

#[test]
fn random_dispatch_does_crash() {
    let crashes: f64 = (1..=3).map(|s| eval(PolicyName::Random, s).crashed_rate).sum();
    assert!(crashes > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn round_robin_counts_stay_balanced(n in 1usize..12, calls in 0usize..100) {
        let mut rr = RoundRobinPolicy::new(n);
        let mut counts = vec![0usize; n];
        for _ in 0..calls {
            counts[rr.next_action()] += 1;
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }
    }

    #[test]
    fn prophet_picks_a_feasible_provider_when_one_exists(f in any::<u64>(), w in any::<u64>(), a in any::<u64>()) {
        let cfg = EnvConfig {
            num_asps: 5,
            num_tasks: 80,
            episode_len: 80,
            arrival_rate: 0.05,
            ..EnvConfig::default()
        };
        let mut env = AspEnv::new(cfg.clone(), sample_fleet(&cfg, &mut rng(f))).unwrap();
        let mut obs = env.reset(&mut rng(w)).unwrap();
        let mut r = rng(a);
        let mut prophet = ProphetPolicy;
        while !env.is_done() {
            let view = DecisionView::of(&env, &obs);
            let need = view.task.unwrap().steps;
            let choice = prophet.act(&view, &mut r).unwrap();
            if view.availability.iter().any(|&v| v >= need) {
                prop_assert!(view.availability[choice] >= need);
            }
            // Random moves in between keep the fleet loaded.
            let action = if r.random::<bool>() { choice } else { r.random_range(0..cfg.num_asps) };
            obs = env.step(action).unwrap().observation;
        }
    }
}
