//! Structural metrics: clustering on the undirected projection and
//! shortest directed path lengths.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::DirectedWeightedNetwork;
use crate::error::{Error, Result};

/// Undirected projection: `i ~ j` iff a link exists in either direction.
/// The projected weight is the sum of both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    neighbours: Vec<Vec<(usize, f64)>>,
}

impl Projection {
    pub fn of(net: &DirectedWeightedNetwork) -> Self {
        let n = net.node_count();
        let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for e in net.edges() {
            neighbours[e.source].push((e.target, e.weight));
            neighbours[e.target].push((e.source, e.weight));
        }
        for list in &mut neighbours {
            list.sort_by_key(|&(k, _)| k);
            list.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }
        Self { neighbours }
    }

    pub fn node_count(&self) -> usize {
        self.neighbours.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbours[node].len()
    }

    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbours[node].iter().map(|&(k, _)| k)
    }

    pub fn weighted_neighbours(&self, node: usize) -> &[(usize, f64)] {
        &self.neighbours[node]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbours[a].binary_search_by_key(&b, |&(k, _)| k).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbours.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn link_count(&self) -> usize {
        self.neighbours.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Links over `C(n, 2)`; zero for fewer than two nodes.
    pub fn density(&self) -> f64 {
        let n = self.node_count();
        if n < 2 {
            return 0.0;
        }
        self.link_count() as f64 / (n * (n - 1) / 2) as f64
    }

    fn local_clustering(&self, v: usize) -> f64 {
        let d = self.degree(v);
        if d < 2 {
            return 0.0;
        }
        // Ordered neighbour pairs that are adjacent: twice the links among
        // the neighbours of v.
        let ordered_pairs: usize = self
            .neighbours(v)
            .map(|u| sorted_intersection(&self.neighbours[u], &self.neighbours[v]))
            .sum();
        ordered_pairs as f64 / (d * (d - 1)) as f64
    }
}

fn sorted_intersection(a: &[(usize, f64)], b: &[(usize, f64)]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Local clustering coefficient of `v` on the undirected projection;
/// nodes of projected degree below two score 0.
pub fn local_clustering(net: &DirectedWeightedNetwork, v: usize) -> Result<f64> {
    net.check_node(v)?;
    Ok(Projection::of(net).local_clustering(v))
}

pub fn average_clustering(net: &DirectedWeightedNetwork) -> f64 {
    let proj = Projection::of(net);
    let n = proj.node_count();
    if n == 0 {
        return 0.0;
    }
    (0..n).map(|v| proj.local_clustering(v)).sum::<f64>() / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLengthReport {
    /// Mean hop count over reachable ordered pairs; `None` if there are none.
    pub mean: Option<f64>,
    pub reachable_pairs: u64,
    pub unreachable_pairs: u64,
}

/// BFS from every node along link direction. Unreachable pairs are counted
/// separately and left out of the mean.
pub fn path_length_report(net: &DirectedWeightedNetwork) -> PathLengthReport {
    let n = net.node_count();
    let (hops, reachable) = (0..n)
        .into_par_iter()
        .map(|source| {
            let mut dist = vec![u32::MAX; n];
            let mut queue = VecDeque::new();
            dist[source] = 0;
            queue.push_back(source);
            let (mut hops, mut reached) = (0u64, 0u64);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in net.out_links(u) {
                    if dist[w] == u32::MAX {
                        dist[w] = dist[u] + 1;
                        hops += u64::from(dist[w]);
                        reached += 1;
                        queue.push_back(w);
                    }
                }
            }
            (hops, reached)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let total = (n as u64) * (n as u64).saturating_sub(1);
    PathLengthReport {
        mean: (reachable > 0).then(|| hops as f64 / reachable as f64),
        reachable_pairs: reachable,
        unreachable_pairs: total - reachable,
    }
}

pub fn average_path_length(net: &DirectedWeightedNetwork) -> Result<f64> {
    path_length_report(net).mean.ok_or(Error::Disconnected)
}
