//! Independent oracles shared by the integration and acceptance tests.
//! None of these call into the code paths they check.

#![allow(dead_code)]

use contagion::balance::BalanceSheet;
use contagion::netgen::{DirectedWeightedNetwork, Edge};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Rescans every bank, recomputing its losses from scratch against the full
/// defaulted set, until no classification changes.
pub fn brute_force_cascade(
    net: &DirectedWeightedNetwork,
    sheets: &[BalanceSheet],
    shock: &[usize],
    recovery_rate: f64,
    q: f64,
) -> Vec<usize> {
    let n = net.node_count();
    let mut defaulted = vec![false; n];
    for &s in shock {
        defaulted[s] = true;
    }
    let edges: Vec<_> = net.edges().collect();
    loop {
        let mut changed = false;
        for bank in 0..n {
            if defaulted[bank] {
                continue;
            }
            let loss: f64 = edges
                .iter()
                .filter(|e| e.target == bank && defaulted[e.source])
                .map(|e| (1.0 - recovery_rate) * e.weight)
                .sum();
            let s = &sheets[bank];
            if s.a_ib - loss + q * s.a_m - s.l_ib - s.d <= 0.0 {
                defaulted[bank] = true;
                changed = true;
            }
        }
        if !changed {
            return (0..n).filter(|&i| defaulted[i]).collect();
        }
    }
}

/// Stationary distribution of a dense row-stochastic matrix by power
/// iteration on the lazy chain `(I + P) / 2`.
pub fn stationary_by_power_iteration(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += pi[i] * 0.5 * (p[i][j] + if i == j { 1.0 } else { 0.0 });
            }
        }
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    pi
}

/// Binomial PMF by direct multiplication in log space with an explicit
/// log-factorial sum.
pub fn binomial_pmf_oracle(trials: u64, p: f64, k: u64) -> f64 {
    let ln_fact = |m: u64| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let ln = ln_fact(trials) - ln_fact(k) - ln_fact(trials - k)
        + k as f64 * p.ln()
        + (trials - k) as f64 * (1.0 - p).ln();
    ln.exp()
}

/// Pearson chi-square goodness of fit. Tail bins are merged until every
/// bin expects at least five counts. Returns `(statistic, dof, p_value)`.
pub fn chi_square_gof(observed: &[u64], expected_prob: &[f64]) -> (f64, usize, f64) {
    let total: u64 = observed.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (o, p) in observed.iter().zip(expected_prob) {
        obs_acc += *o as f64;
        exp_acc += p * total as f64;
        if exp_acc >= 5.0 {
            bins.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += obs_acc;
        last.1 += exp_acc;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64).unwrap().sf(stat);
    (stat, dof, p_value)
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Random cascade instance with at most six banks. Buffers are on the scale
/// of one exposure, so cascades of every length occur.
pub fn small_instance(
    rng: &mut ChaCha8Rng,
    case: u64,
) -> (DirectedWeightedNetwork, Vec<BalanceSheet>, Vec<usize>, f64) {
    let n = rng.random_range(1..=6);
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.random_bool(0.5) {
                edges.push(Edge { source: s, target: t, weight: rng.random_range(0.5..3.0) });
            }
        }
    }
    let net = DirectedWeightedNetwork::from_edges(n, edges).unwrap();
    let sheets = (0..n)
        .map(|i| {
            let a_ib = net.in_weight(i);
            let l_ib = net.out_weight(i);
            let k = rng.random_range(0.01..4.0);
            let a_m = rng.random_range(0.0..5.0) + l_ib;
            BalanceSheet::new(a_ib, a_m, l_ib, a_ib + a_m - l_ib - k)
        })
        .collect();
    let shock: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.3)).collect();
    let recovery = match case % 3 {
        0 => 0.0,
        1 => 0.5,
        _ => rng.random_range(0.0..1.0),
    };
    (net, sheets, shock, recovery)
}
