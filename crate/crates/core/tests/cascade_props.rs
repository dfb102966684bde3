mod common;

use contagion::balance::{build_sheets, BalanceSheet, SheetConfig};
use contagion::cascade::{draw_shock, CascadeConfig, CascadeState};
use contagion::netgen::{generate, DirectedWeightedNetwork, NetworkConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Small random instance: network, initially solvent sheets with buffers on
/// the scale of a single exposure, and a shock set.
fn instance(n: usize, p: f64, seed: u64, shocked: usize) -> (DirectedWeightedNetwork, Vec<BalanceSheet>, Vec<usize>) {
    let net = generate(&NetworkConfig::new(n, p, seed)).unwrap();
    let sheets = build_sheets(&net, &SheetConfig::default(), seed).unwrap();
    let shock = draw_shock(n, shocked.min(n), seed).unwrap();
    (net, sheets, shock)
}

fn run(net: &DirectedWeightedNetwork, sheets: &[BalanceSheet], shock: &[usize], cfg: CascadeConfig) -> (Vec<usize>, usize) {
    let mut st = CascadeState::new(net, sheets.to_vec(), cfg).unwrap();
    st.apply_initial_shock(shock).unwrap();
    let res = st.run_cascade();
    (res.defaulted, res.rounds)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn terminates_within_n_rounds_and_keeps_shocked(
        n in 1usize..60, p in 0.0f64..0.3, seed in any::<u64>(), shocked in 0usize..20,
    ) {
        let (net, sheets, shock) = instance(n, p, seed, shocked);
        let (defaulted, rounds) = run(&net, &sheets, &shock, CascadeConfig::default());
        prop_assert!(rounds <= n);
        prop_assert!(shock.iter().all(|s| defaulted.binary_search(s).is_ok()));
        let bound = 100.0 * (n - shock.len()) as f64 / n as f64;
        prop_assert!(100.0 * (n - defaulted.len()) as f64 / n as f64 <= bound);
    }

    #[test]
    fn evaluation_order_does_not_matter(
        n in 2usize..40, p in 0.02f64..0.4, seed in any::<u64>(), shocked in 1usize..10,
    ) {
        let (net, sheets, shock) = instance(n, p, seed, shocked);
        let mut reference = CascadeState::new(&net, sheets.clone(), CascadeConfig::default()).unwrap();
        reference.apply_initial_shock(&shock).unwrap();
        reference.run_cascade();

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut shuffled = CascadeState::new(&net, sheets, CascadeConfig::default()).unwrap();
        shuffled.apply_initial_shock(&shock).unwrap();
        loop {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            if shuffled.propagate_round_in_order(&order).is_empty() {
                break;
            }
        }
        prop_assert_eq!(shuffled.defaulted(), reference.defaulted());
        prop_assert_eq!(shuffled.timeline(), reference.timeline());
    }

    #[test]
    fn full_recovery_contains_the_shock(
        n in 1usize..50, p in 0.0f64..0.5, seed in any::<u64>(), shocked in 0usize..20,
    ) {
        let (net, sheets, shock) = instance(n, p, seed, shocked);
        let cfg = CascadeConfig { recovery_rate: 1.0, ..CascadeConfig::default() };
        let (defaulted, _) = run(&net, &sheets, &shock, cfg);
        prop_assert_eq!(defaulted, shock);
    }

    #[test]
    fn defaults_only_grow_round_by_round(
        n in 2usize..50, p in 0.02f64..0.3, seed in any::<u64>(), shocked in 1usize..10,
    ) {
        let (net, sheets, shock) = instance(n, p, seed, shocked);
        let mut st = CascadeState::new(&net, sheets, CascadeConfig::default()).unwrap();
        st.apply_initial_shock(&shock).unwrap();
        let mut prev: Vec<bool> = st.defaulted().to_vec();
        while !st.propagate_round().is_empty() {
            let now = st.defaulted();
            prop_assert!(prev.iter().zip(now).all(|(a, b)| !a || *b));
            prev = now.to_vec();
        }
        // Each bank appears in the timeline at most once.
        let mut seen: Vec<usize> = st.timeline().iter().flat_map(|(_, ids)| ids.clone()).collect();
        let total = seen.len();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), total);
    }
}

#[test]
fn matches_brute_force_on_small_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000u64 {
        let (net, sheets, shock, recovery) = common::small_instance(&mut rng, case);
        let cfg = CascadeConfig { recovery_rate: recovery, ..CascadeConfig::default() };
        let (defaulted, _) = run(&net, &sheets, &shock, cfg);
        let oracle = common::brute_force_cascade(&net, &sheets, &shock, recovery, 1.0);
        assert_eq!(defaulted, oracle, "case {case}");
    }
}
