//! Test-only oracles written against a plain adjacency matrix so they share
//! no code with the library paths they check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mlncc::UndirectedGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const UNREACHABLE: u32 = u32::MAX;

pub struct Matrix {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
}

impl Matrix {
    pub fn from_graph(g: &UndirectedGraph) -> Self {
        let n = g.n();
        let mut adj = vec![vec![false; n]; n];
        for (u, v) in g.edges() {
            adj[u as usize][v as usize] = true;
            adj[v as usize][u as usize] = true;
        }
        Self { n, adj }
    }

    pub fn edge_set(&self) -> BTreeSet<(u32, u32)> {
        let mut out = BTreeSet::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u][v] {
                    out.insert((u as u32, v as u32));
                }
            }
        }
        out
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].iter().filter(|&&b| b).count()
    }

    pub fn neighbors(&self, u: usize) -> Vec<u32> {
        (0..self.n)
            .filter(|&v| self.adj[u][v])
            .map(|v| v as u32)
            .collect()
    }

    /// Floyd-Warshall; `UNREACHABLE` marks disconnected pairs.
    #[allow(clippy::needless_range_loop)]
    pub fn distances(&self) -> Vec<Vec<u32>> {
        let n = self.n;
        let mut d = vec![vec![UNREACHABLE; n]; n];
        for u in 0..n {
            d[u][u] = 0;
            for v in 0..n {
                if self.adj[u][v] {
                    d[u][v] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] != UNREACHABLE
                        && d[k][j] != UNREACHABLE
                        && d[i][k] + d[k][j] < d[i][j]
                    {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }
}

/// n-penalty distance sums from a distance matrix.
pub fn penalty_sums(d: &[Vec<u32>]) -> Vec<u64> {
    let n = d.len();
    d.iter()
        .map(|row| {
            row.iter()
                .map(|&x| if x == UNREACHABLE { n as u64 } else { x as u64 })
                .sum()
        })
        .collect()
}

/// Wasserman-Faust closeness evaluated straight from its definition.
pub fn wf_direct(d: &[Vec<u32>]) -> Vec<f64> {
    let n = d.len();
    d.iter()
        .map(|row| {
            let reach: Vec<u32> = row.iter().copied().filter(|&x| x != UNREACHABLE).collect();
            let k = reach.len() as f64;
            let s: u32 = reach.iter().sum();
            if n <= 1 || s == 0 {
                0.0
            } else {
                ((k - 1.0) / (n as f64 - 1.0)) * ((k - 1.0) / s as f64)
            }
        })
        .collect()
}

pub fn hubs_of(closeness: &[f64]) -> Vec<u32> {
    let avg = closeness.iter().sum::<f64>() / closeness.len().max(1) as f64;
    (0..closeness.len())
        .filter(|&u| closeness[u] > avg)
        .map(|u| u as u32)
        .collect()
}

/// Hub set of the AND of two graphs via edge-set intersection and
/// Floyd-Warshall.
pub fn and_hubs_oracle(gx: &UndirectedGraph, gy: &UndirectedGraph) -> (Vec<u32>, Vec<u64>) {
    let (mx, my) = (Matrix::from_graph(gx), Matrix::from_graph(gy));
    let common: Vec<(u32, u32)> = mx
        .edge_set()
        .intersection(&my.edge_set())
        .copied()
        .collect();
    let and = UndirectedGraph::from_edges(gx.n(), common).unwrap();
    let d = Matrix::from_graph(&and).distances();
    (hubs_of(&wf_direct(&d)), penalty_sums(&d))
}

pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> UndirectedGraph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.random_bool(density) {
                edges.push((u, v));
            }
        }
    }
    UndirectedGraph::from_edges(n, edges).unwrap()
}

/// Random graph with a random spanning tree underneath, so it is connected.
pub fn random_connected(rng: &mut impl Rng, n: usize, density: f64) -> UndirectedGraph {
    let mut edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (rng.random_range(0..v), v)).collect();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.random_bool(density) {
                edges.push((u, v));
            }
        }
    }
    UndirectedGraph::from_edges(n, edges).unwrap()
}

/// A random supergraph of `g` on the same vertices.
pub fn random_supergraph(rng: &mut impl Rng, g: &UndirectedGraph, extra: f64) -> UndirectedGraph {
    let mut edges: Vec<(u32, u32)> = g.edges().collect();
    let n = g.n() as u32;
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    UndirectedGraph::from_edges(g.n(), edges).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
