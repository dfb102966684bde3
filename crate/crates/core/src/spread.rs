//! Spreading processes: explicit-Euler diffusion of a node quantity and
//! simple random walks, on the undirected projection of a network.

use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::netgen::{DirectedWeightedNetwork, Projection};
use crate::rng::{self, child_seed, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionMode {
    /// `A_ij` in {0, 1}.
    #[default]
    Unweighted,
    /// `A_ij` is the projected link weight.
    Weighted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionState {
    pub phi: Vec<f64>,
    /// Rate constant times time step.
    pub c_dt: f64,
    pub t: u64,
}

impl DiffusionState {
    pub fn new(phi: Vec<f64>, c_dt: f64) -> Self {
        Self { phi, c_dt, t: 0 }
    }

    pub fn total(&self) -> f64 {
        self.phi.iter().sum()
    }

    pub fn spread(&self) -> f64 {
        let max = self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.phi.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Diffusion on a fixed network; the projection is built once.
#[derive(Debug, Clone)]
pub struct Diffusion {
    projection: Projection,
    mode: DiffusionMode,
    max_degree: f64,
}

impl Diffusion {
    pub fn new(net: &DirectedWeightedNetwork, mode: DiffusionMode) -> Self {
        let projection = Projection::of(net);
        let max_degree = (0..projection.node_count())
            .map(|i| match mode {
                DiffusionMode::Unweighted => projection.degree(i) as f64,
                DiffusionMode::Weighted => projection
                    .weighted_neighbours(i)
                    .iter()
                    .map(|&(_, w)| w)
                    .sum(),
            })
            .fold(0.0, f64::max);
        Self {
            projection,
            mode,
            max_degree,
        }
    }

    /// Largest stable `c_dt`, `1 / max degree`.
    pub fn max_stable_c_dt(&self) -> f64 {
        if self.max_degree > 0.0 {
            1.0 / self.max_degree
        } else {
            f64::INFINITY
        }
    }

    fn check(&self, state: &DiffusionState) -> Result<()> {
        if state.phi.len() != self.projection.node_count() {
            return Err(Error::config(
                "phi",
                format!(
                    "{} values for {} nodes",
                    state.phi.len(),
                    self.projection.node_count()
                ),
            ));
        }
        if !(state.c_dt > 0.0) || state.c_dt * self.max_degree > 1.0 {
            return Err(Error::config(
                "c_dt",
                format!(
                    "{} violates 0 < c_dt * max degree ({}) <= 1",
                    state.c_dt, self.max_degree
                ),
            ));
        }
        Ok(())
    }

    /// `phi_i += c_dt * sum_j A_ij (phi_j - phi_i)` for all `i` at once.
    pub fn step(&self, state: &DiffusionState) -> Result<DiffusionState> {
        self.check(state)?;
        let phi = &state.phi;
        let next = (0..phi.len())
            .map(|i| {
                let flow: f64 = self
                    .projection
                    .weighted_neighbours(i)
                    .iter()
                    .map(|&(j, w)| {
                        let a = match self.mode {
                            DiffusionMode::Unweighted => 1.0,
                            DiffusionMode::Weighted => w,
                        };
                        a * (phi[j] - phi[i])
                    })
                    .sum();
                phi[i] + flow * state.c_dt
            })
            .collect();
        Ok(DiffusionState {
            phi: next,
            c_dt: state.c_dt,
            t: state.t + 1,
        })
    }
}

/// One unweighted diffusion step. Repeated stepping should go through
/// [`Diffusion`] to avoid rebuilding the projection.
pub fn diffusion_step(net: &DirectedWeightedNetwork, state: &DiffusionState) -> Result<DiffusionState> {
    Diffusion::new(net, DiffusionMode::Unweighted).step(state)
}

/// Row-stochastic simple random walk matrix, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Non-zero entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|idx| self.rows[i][idx].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; n];
                for &(j, v) in row {
                    dense[j] = v;
                }
                dense
            })
            .collect()
    }
}

/// `P_ij = 1 / d(i)` for neighbours in the undirected projection. Isolated
/// nodes get `P_ii = 1`.
pub fn transition_matrix(net: &DirectedWeightedNetwork) -> TransitionMatrix {
    let proj = Projection::of(net);
    let rows = (0..proj.node_count())
        .map(|i| {
            let d = proj.degree(i);
            if d == 0 {
                vec![(i, 1.0)]
            } else {
                proj.neighbours(i).map(|j| (j, 1.0 / d as f64)).collect()
            }
        })
        .collect();
    TransitionMatrix { rows }
}

/// `steps + 1` nodes starting at `start`, each successor drawn uniformly
/// from the current node's neighbours.
pub fn random_walk(
    net: &DirectedWeightedNetwork,
    start: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    net.check_node(start)?;
    let matrix = transition_matrix(net);
    let mut rng = rng::stream(seed, Stream::Walk);
    let mut path = Vec::with_capacity(steps + 1);
    let mut at = start;
    path.push(at);
    for _ in 0..steps {
        let row = matrix.row(at);
        at = row[rng.random_range(0..row.len())].0;
        path.push(at);
    }
    Ok(path)
}

pub type LatticePoint = [i64; 3];

const LATTICE_MOVES: [LatticePoint; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

/// Walks on the cubic lattice from the origin, one unit step along a
/// uniformly chosen axis direction at a time. Walker `k` uses child seed
/// `seed + k`.
pub fn lattice_walk_3d(walkers: usize, steps: usize, seed: u64) -> Result<Vec<Vec<LatticePoint>>> {
    if walkers == 0 {
        return Err(Error::config("walkers", "need at least one walker"));
    }
    Ok((0..walkers)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(child_seed(seed, k as u64), Stream::Walk);
            let mut pos = [0i64; 3];
            let mut path = Vec::with_capacity(steps + 1);
            path.push(pos);
            for _ in 0..steps {
                let mv = LATTICE_MOVES[rng.random_range(0..6)];
                for axis in 0..3 {
                    pos[axis] += mv[axis];
                }
                path.push(pos);
            }
            path
        })
        .collect())
}

pub fn write_lattice_csv<W: Write>(paths: &[Vec<LatticePoint>], mut out: W) -> Result<()> {
    writeln!(out, "walker_id,step,x,y,z")?;
    for (walker, path) in paths.iter().enumerate() {
        for (step, [x, y, z]) in path.iter().enumerate() {
            writeln!(out, "{walker},{step},{x},{y},{z}")?;
        }
    }
    Ok(())
}

pub fn write_node_walk_csv<W: Write>(paths: &[Vec<usize>], mut out: W) -> Result<()> {
    writeln!(out, "walker_id,step,node")?;
    for (walker, path) in paths.iter().enumerate() {
        for (step, node) in path.iter().enumerate() {
            writeln!(out, "{walker},{step},{node}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{generate, Edge, NetworkConfig};

    fn undirected(n: usize, links: &[(usize, usize)]) -> DirectedWeightedNetwork {
        DirectedWeightedNetwork::from_edges(
            n,
            links.iter().map(|&(source, target)| Edge {
                source,
                target,
                weight: 1.0,
            }),
        )
        .unwrap()
    }

    #[test]
    fn uniform_phi_is_fixed() {
        let net = generate(&NetworkConfig::new(30, 0.2, 4)).unwrap();
        let diff = Diffusion::new(&net, DiffusionMode::Unweighted);
        let state = DiffusionState::new(vec![2.5; 30], diff.max_stable_c_dt());
        let next = diff.step(&state).unwrap();
        assert_eq!(next.phi, state.phi);
        assert_eq!(next.t, 1);
    }

    #[test]
    fn two_node_exchange() {
        let net = undirected(2, &[(0, 1)]);
        let next = diffusion_step(&net, &DiffusionState::new(vec![1.0, 0.0], 0.5)).unwrap();
        assert_eq!(next.phi, vec![0.5, 0.5]);
    }

    #[test]
    fn isolated_node_keeps_value() {
        let net = undirected(3, &[(0, 1)]);
        let diff = Diffusion::new(&net, DiffusionMode::Unweighted);
        let mut state = DiffusionState::new(vec![1.0, 0.0, 7.0], 0.5);
        for _ in 0..100 {
            state = diff.step(&state).unwrap();
        }
        assert_eq!(state.phi[2], 7.0);
    }

    #[test]
    fn unstable_step_rejected() {
        let net = undirected(3, &[(0, 1), (0, 2)]);
        assert!(diffusion_step(&net, &DiffusionState::new(vec![1.0, 0.0, 0.0], 0.6)).is_err());
        assert!(diffusion_step(&net, &DiffusionState::new(vec![1.0, 0.0], 0.1)).is_err());
        assert!(diffusion_step(&net, &DiffusionState::new(vec![1.0, 0.0, 0.0], 0.5)).is_ok());
    }

    #[test]
    fn weighted_mode_uses_weights() {
        let net = DirectedWeightedNetwork::from_edges(
            2,
            [Edge { source: 0, target: 1, weight: 2.0 }],
        )
        .unwrap();
        let diff = Diffusion::new(&net, DiffusionMode::Weighted);
        assert_eq!(diff.max_stable_c_dt(), 0.5);
        let next = diff.step(&DiffusionState::new(vec![1.0, 0.0], 0.25)).unwrap();
        assert_eq!(next.phi, vec![0.5, 0.5]);
    }

    #[test]
    fn converges_to_initial_mean() {
        let net = generate(&NetworkConfig::new(40, 0.2, 12)).unwrap();
        let diff = Diffusion::new(&net, DiffusionMode::Unweighted);
        let phi: Vec<f64> = (0..40).map(|i| (i * 7 % 13) as f64).collect();
        let mean = phi.iter().sum::<f64>() / 40.0;
        let mut state = DiffusionState::new(phi, 0.5 * diff.max_stable_c_dt());
        let mut steps = 0;
        while state.spread() >= 1e-6 {
            state = diff.step(&state).unwrap();
            steps += 1;
            assert!(steps < 10_000, "no convergence");
        }
        assert!(state.phi.iter().all(|v| (v - mean).abs() < 1e-6));
    }

    #[test]
    fn transition_examples() {
        assert_eq!(
            transition_matrix(&undirected(2, &[(0, 1)])).to_dense(),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        let tri = transition_matrix(&undirected(3, &[(0, 1), (1, 2), (2, 0)]));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(tri.get(i, j), if i == j { 0.0 } else { 0.5 });
            }
        }
        // Figure-style graph: node 3 (index 2) links to 1, 4 and 5.
        let g = undirected(5, &[(0, 1), (0, 2), (2, 3), (2, 4)]);
        let m = transition_matrix(&g);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(0, 2), 0.5);
        let isolated = transition_matrix(&undirected(3, &[(0, 1)]));
        assert_eq!(isolated.get(2, 2), 1.0);
    }

    #[test]
    fn rows_are_stochastic() {
        for seed in 0..10 {
            let net = generate(&NetworkConfig::new(60, 0.03, seed)).unwrap();
            let m = transition_matrix(&net);
            for i in 0..m.size() {
                let sum: f64 = m.row(i).iter().map(|&(_, v)| v).sum();
                assert!((sum - 1.0).abs() < 1e-12);
                for &(j, v) in m.row(i) {
                    assert!((0.0..=1.0).contains(&v));
                    assert!(j == i || net.weight(i, j).is_some() || net.weight(j, i).is_some());
                }
            }
        }
    }

    #[test]
    fn walk_shapes() {
        let net = undirected(2, &[(0, 1)]);
        assert_eq!(random_walk(&net, 1, 0, 5).unwrap(), vec![1]);
        let path = random_walk(&net, 0, 9, 5).unwrap();
        assert_eq!(path, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert!(random_walk(&net, 2, 3, 5).is_err());
        let g = generate(&NetworkConfig::new(30, 0.2, 1)).unwrap();
        assert_eq!(random_walk(&g, 0, 500, 9).unwrap(), random_walk(&g, 0, 500, 9).unwrap());
    }

    #[test]
    fn lattice_shapes() {
        assert_eq!(lattice_walk_3d(1, 0, 1).unwrap(), vec![vec![[0, 0, 0]]]);
        assert!(lattice_walk_3d(0, 5, 1).is_err());
        let paths = lattice_walk_3d(20, 10, 3).unwrap();
        for path in &paths {
            assert_eq!(path.len(), 11);
            for w in path.windows(2) {
                let dist: i64 = (0..3).map(|a| (w[1][a] - w[0][a]).abs()).sum();
                assert_eq!(dist, 1);
            }
        }
        let mut buf = Vec::new();
        write_lattice_csv(&paths, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 20 * 11);
    }
}
