//! Closed-form distributions for G(N,p) networks.

use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{Error, Result};

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} is outside [0, 1]")))
    }
}

/// Maximum number of links in an undirected simple graph, `C(n, 2)`.
pub fn max_undirected_links(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// `C(trials, k) p^k (1-p)^(trials-k)`, evaluated in log space.
pub fn binomial_pmf(trials: u64, p: f64, k: u64) -> Result<f64> {
    check_probability(p)?;
    if k > trials {
        return Err(Error::Domain(format!("{k} successes exceed {trials} trials")));
    }
    // Exact endpoints: 0^0 = 1 and log(0) must not appear.
    if p == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if k == trials { 1.0 } else { 0.0 });
    }
    let ln = ln_binomial(trials, k) + k as f64 * p.ln() + (trials - k) as f64 * (-p).ln_1p();
    Ok(ln.exp())
}

/// Probability that an undirected G(n,p) graph has exactly `links` links.
pub fn link_count_pmf(n: u64, p: f64, links: u64) -> Result<f64> {
    let max = max_undirected_links(n);
    if links > max {
        return Err(Error::Domain(format!(
            "{links} links exceed the maximum {max} for {n} nodes"
        )));
    }
    binomial_pmf(max, p, links)
}

/// Binomial degree law: each of the other `n - 1` nodes is a neighbour
/// independently with probability `p`.
pub fn degree_pmf_binomial(n: u64, p: f64, z: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("network needs at least one node".into()));
    }
    if z > n - 1 {
        return Err(Error::Domain(format!("degree {z} exceeds n - 1 = {}", n - 1)));
    }
    binomial_pmf(n - 1, p, z)
}

/// Poisson approximation of the degree law with mean degree `z_av`.
pub fn degree_pmf_poisson(z_av: f64, z: u64) -> Result<f64> {
    if !(z_av >= 0.0 && z_av.is_finite()) {
        return Err(Error::Domain(format!("mean degree {z_av} must be non-negative")));
    }
    if z_av == 0.0 {
        return Ok(if z == 0 { 1.0 } else { 0.0 });
    }
    Ok((z as f64 * z_av.ln() - z_av - ln_factorial(z)).exp())
}

/// `log(n) / log(z_av)`: typical shortest-path length of a random network.
pub fn path_length_estimate(n: u64, z_av: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("network needs at least one node".into()));
    }
    if !(z_av > 1.0 && z_av.is_finite()) {
        return Err(Error::Domain(format!("mean degree {z_av} must exceed 1")));
    }
    Ok((n as f64).ln() / z_av.ln())
}
