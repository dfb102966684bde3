//! Directed, weighted G(N,p) random networks.
//!
//! Every one of the `n(n-1)` ordered pairs `(i, j)`, `i != j`, carries a link
//! independently with probability `p`. A link `source -> target` with weight
//! `w` is an interbank exposure: `source` owes `w` to `target`, so the
//! weight is a liability of the source and an asset of the target.

mod analytic;
mod edgelist;
mod metrics;

pub use analytic::{
    binomial_pmf, degree_pmf_binomial, degree_pmf_poisson, link_count_pmf, max_undirected_links,
    path_length_estimate,
};
pub use edgelist::{read_edge_list, write_edge_list};
pub use metrics::{
    average_clustering, average_path_length, local_clustering, path_length_report,
    PathLengthReport, Projection,
};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// How link weights are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    Unit,
    Uniform { lo: f64, hi: f64 },
}

impl Default for WeightRule {
    fn default() -> Self {
        WeightRule::Uniform { lo: 0.5, hi: 1.5 }
    }
}

impl WeightRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightRule::Unit => Ok(()),
            WeightRule::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 {
                    return Err(Error::config("weight_rule", "bounds must be positive and finite"));
                }
                if lo >= hi {
                    return Err(Error::config("weight_rule", "lo must be below hi"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n: usize,
    pub p: f64,
    pub weight_rule: WeightRule,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(n: usize, p: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            weight_rule: WeightRule::default(),
            seed,
        }
    }

    pub fn with_weights(mut self, rule: WeightRule) -> Self {
        self.weight_rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "network needs at least one node"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::config("p", format!("{} is outside [0, 1]", self.p)));
        }
        self.weight_rule.validate()
    }
}

/// A single directed exposure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Immutable directed weighted network with no self-loops and no parallel
/// links. Adjacency lists are kept sorted by neighbour id.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedWeightedNetwork {
    n: usize,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl DirectedWeightedNetwork {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a network from an edge list, enforcing the structural
    /// invariants.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut net = Self::empty(n);
        for e in edges {
            net.insert(e)?;
        }
        for list in net.out_adj.iter_mut().chain(net.in_adj.iter_mut()) {
            list.sort_by_key(|&(k, _)| k);
        }
        for (source, list) in net.out_adj.iter().enumerate() {
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::Domain(format!(
                    "parallel link {} -> {}",
                    source, w[0].0
                )));
            }
        }
        Ok(net)
    }

    fn insert(&mut self, e: Edge) -> Result<()> {
        if e.source >= self.n {
            return Err(Error::UnknownNode { id: e.source, n: self.n });
        }
        if e.target >= self.n {
            return Err(Error::UnknownNode { id: e.target, n: self.n });
        }
        if e.source == e.target {
            return Err(Error::Domain(format!("self-loop on node {}", e.source)));
        }
        if !(e.weight > 0.0 && e.weight.is_finite()) {
            return Err(Error::Domain(format!(
                "link {} -> {} has non-positive weight {}",
                e.source, e.target, e.weight
            )));
        }
        self.out_adj[e.source].push((e.target, e.weight));
        self.in_adj[e.target].push((e.source, e.weight));
        self.edge_count += 1;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(source, list)| {
            list.iter().map(move |&(target, weight)| Edge {
                source,
                target,
                weight,
            })
        })
    }

    pub fn weight(&self, source: usize, target: usize) -> Option<f64> {
        let list = self.out_adj.get(source)?;
        list.binary_search_by_key(&target, |&(k, _)| k)
            .ok()
            .map(|idx| list[idx].1)
    }

    /// Creditors of `node`: `(target, weight)` for each outgoing link.
    pub fn out_links(&self, node: usize) -> &[(usize, f64)] {
        &self.out_adj[node]
    }

    /// Debtors of `node`: `(source, weight)` for each incoming link.
    pub fn in_links(&self, node: usize) -> &[(usize, f64)] {
        &self.in_adj[node]
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_adj[node].len()
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.in_adj[node].len()
    }

    pub fn in_weight(&self, node: usize) -> f64 {
        self.in_adj[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn out_weight(&self, node: usize) -> f64 {
        self.out_adj[node].iter().map(|&(_, w)| w).sum()
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.n {
            Ok(())
        } else {
            Err(Error::UnknownNode { id: node, n: self.n })
        }
    }

    pub fn degree_stats(&self) -> DegreeStats {
        DegreeStats::of(self)
    }
}

/// Generates a directed G(N,p) network. Pairs are visited in row-major
/// `(source, target)` order; each pair consumes one uniform draw and each
/// realised link one weight draw.
pub fn generate(config: &NetworkConfig) -> Result<DirectedWeightedNetwork> {
    config.validate()?;
    let n = config.n;
    let mut rng = rng::stream(config.seed, Stream::Network);
    let mut out_adj = vec![Vec::new(); n];
    let mut in_adj = vec![Vec::new(); n];
    let mut edge_count = 0;
    for source in 0..n {
        for target in (0..n).filter(|&t| t != source) {
            if rng.random::<f64>() < config.p {
                let weight = match config.weight_rule {
                    WeightRule::Unit => 1.0,
                    WeightRule::Uniform { lo, hi } => rng.random_range(lo..hi),
                };
                out_adj[source].push((target, weight));
                in_adj[target].push((source, weight));
                edge_count += 1;
            }
        }
    }
    // in_adj is filled in increasing source order, so both sides are sorted.
    Ok(DirectedWeightedNetwork {
        n,
        out_adj,
        in_adj,
        edge_count,
    })
}

/// Degree histograms: `hist[k]` is the number of nodes with degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub in_degrees: Vec<usize>,
    pub out_degrees: Vec<usize>,
    /// In plus out degree per node.
    pub total_degrees: Vec<usize>,
    /// Mean total degree, `2 * edges / n`.
    pub z_av: f64,
}

impl DegreeStats {
    fn of(net: &DirectedWeightedNetwork) -> Self {
        fn hist(values: impl Iterator<Item = usize>) -> Vec<usize> {
            let mut h = Vec::new();
            for v in values {
                if v >= h.len() {
                    h.resize(v + 1, 0);
                }
                h[v] += 1;
            }
            h
        }
        let n = net.node_count();
        Self {
            in_degrees: hist((0..n).map(|i| net.in_degree(i))),
            out_degrees: hist((0..n).map(|i| net.out_degree(i))),
            total_degrees: hist((0..n).map(|i| net.in_degree(i) + net.out_degree(i))),
            z_av: 2.0 * net.edge_count() as f64 / n as f64,
        }
    }

    /// Mean out-degree (equal to the mean in-degree), `edges / n`.
    pub fn mean_out_degree(&self) -> f64 {
        self.z_av / 2.0
    }

    pub fn max_total_degree(&self) -> usize {
        self.total_degrees.len().saturating_sub(1)
    }
}
