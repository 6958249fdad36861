use proptest::prelude::*;
use ucrl2b::mdp::{random_communicating, riverswim, support_profile, validate_mdp, EnvironmentSpec};
use ucrl2b::rng::stream;
use ucrl2b::build_environment;

proptest! {
    #[test]
    fn random_environments_are_valid_and_communicating(states in 1usize..=8, actions in 1usize..=3, g in 1usize..=8, seed in any::<u64>()) {
        let gamma = g.min(states);
        let mdp = random_communicating(states, actions, gamma, seed).unwrap();
        prop_assert!(validate_mdp(&mdp).ok);
        prop_assert!(mdp.is_communicating());
        let profile = support_profile(&mdp);
        prop_assert!(profile.gamma_max <= gamma);
        prop_assert_eq!(&mdp, &random_communicating(states, actions, gamma, seed).unwrap());
    }

    #[test]
    fn compact_specs_round_trip(n in 2usize..20) {
        let spec: EnvironmentSpec = format!("riverswim({n})").parse().unwrap();
        prop_assert_eq!(build_environment(&spec).unwrap(), riverswim(n).unwrap());
    }
}

#[test]
fn sampled_transitions_follow_the_table() {
    let mdp = random_communicating(4, 2, 4, 17).unwrap();
    let mut rng = stream(3, 0);
    let draws = 200_000;
    for s in 0..4 {
        for a in 0..2 {
            let mut counts = [0u32; 4];
            let mut reward = 0.0;
            for _ in 0..draws {
                let (r, x) = mdp.step(s, a, &mut rng).unwrap();
                counts[x] += 1;
                reward += r;
            }
            for (x, &c) in counts.iter().enumerate() {
                let p = mdp.prob(s, a, x);
                let sd = (p * (1.0 - p) / draws as f64).sqrt();
                assert!((c as f64 / draws as f64 - p).abs() <= 5.0 * sd + 1e-12, "({s},{a},{x})");
            }
            let mean = mdp.reward_mean(s, a);
            let sd = (mean * (1.0 - mean) / draws as f64).sqrt();
            assert!((reward / draws as f64 - mean).abs() <= 5.0 * sd + 1e-12);
        }
    }
}
