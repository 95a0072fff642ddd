use agod::env::{sample_fleet, AspEnv, EnvConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small() -> EnvConfig {
    EnvConfig {
        num_tasks: 120,
        episode_len: 120,
        ..EnvConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn episode_invariants(fleet_seed in any::<u64>(), work_seed in any::<u64>(), act_seed in any::<u64>(), fast in any::<bool>()) {
        let mut cfg = small();
        if fast {
            // Heavier load so crashes actually occur.
            cfg.arrival_rate = 0.05;
        }
        let fleet = sample_fleet(&cfg, &mut ChaCha8Rng::seed_from_u64(fleet_seed));
        let mut env = AspEnv::new(cfg.clone(), fleet).unwrap();
        let mut obs = env.reset(&mut ChaCha8Rng::seed_from_u64(work_seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(act_seed);
        let (mut credits, mut penalties, mut total) = (0.0, 0.0, 0.0);
        let mut clock = env.clock();
        loop {
            prop_assert_eq!(obs.len(), cfg.obs_dim());
            prop_assert!(obs.iter().all(|&x| 0.0 < x && x < 1.0));
            for s in env.states() {
                let held: u32 = s.running.iter().map(|r| r.steps).sum();
                prop_assert!(held <= s.capacity);
                prop_assert_eq!(s.available(), s.capacity - held);
                for r in &s.running {
                    prop_assert!((r.finish - (r.start + r.duration)).abs() <= 1e-9 * r.finish.abs().max(1.0));
                }
            }
            let out = env.step(rng.random_range(0..cfg.num_asps)).unwrap();
            prop_assert!(out.reward.is_finite());
            prop_assert!(env.clock() >= clock);
            clock = env.clock();
            credits += out.info.utility_gained;
            penalties += out.info.penalty;
            total += out.reward;
            let st = env.stats();
            prop_assert_eq!(st.finished + st.crashed + env.running_count(), st.arrived);
            obs = out.observation;
            if out.done {
                break;
            }
        }
        prop_assert!((total - (credits - penalties)).abs() <= 1e-9);
        prop_assert!((env.stats().reward - total).abs() <= 1e-9);
        prop_assert_eq!(env.transitions(), cfg.episode_len);
    }
}
