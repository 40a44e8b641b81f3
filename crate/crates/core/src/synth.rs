//! Synthetic two-layer networks: a power-law (RMAT) or uniform random edge
//! set per layer, sized as a percentage of a base edge budget, optionally
//! with a shared Hamiltonian path `0-1-...-(n-1)` overlaid on every layer so
//! each layer is connected.
//!
//! All randomness comes from ChaCha20 seeded with the 64-bit spec seed;
//! layer `i` draws from stream `i + 1`, so layers are independent and runs
//! reproduce bit-for-bit on every platform.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{HoMln, UndirectedGraph, VertexId};

pub const DEFAULT_RMAT: [f64; 4] = [0.57, 0.19, 0.19, 0.05];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EdgeDistribution {
    Powerlaw {
        #[serde(default = "rmat_a")]
        a: f64,
        #[serde(default = "rmat_b")]
        b: f64,
        #[serde(default = "rmat_c")]
        c: f64,
        #[serde(default = "rmat_d")]
        d: f64,
    },
    Uniform,
}

fn rmat_a() -> f64 {
    DEFAULT_RMAT[0]
}
fn rmat_b() -> f64 {
    DEFAULT_RMAT[1]
}
fn rmat_c() -> f64 {
    DEFAULT_RMAT[2]
}
fn rmat_d() -> f64 {
    DEFAULT_RMAT[3]
}

impl EdgeDistribution {
    pub fn powerlaw() -> Self {
        let [a, b, c, d] = DEFAULT_RMAT;
        EdgeDistribution::Powerlaw { a, b, c, d }
    }
}

fn default_true() -> bool {
    true
}

fn default_dist1() -> EdgeDistribution {
    EdgeDistribution::powerlaw()
}

fn default_dist2() -> EdgeDistribution {
    EdgeDistribution::Uniform
}

/// Recipe for a two-layer network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub n: usize,
    pub base_edges: u64,
    /// Percent of `base_edges` given to each layer; must sum to 100.
    pub split: [u32; 2],
    #[serde(default = "default_dist1")]
    pub dist1: EdgeDistribution,
    #[serde(default = "default_dist2")]
    pub dist2: EdgeDistribution,
    #[serde(default = "default_true")]
    pub path_overlay: bool,
    #[serde(default)]
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let [p1, p2] = self.split;
        if p1 == 0 || p2 == 0 || p1 + p2 != 100 {
            return Err(Error::InvalidParameter(format!(
                "split must be two positive percentages summing to 100, got ({p1}, {p2})"
            )));
        }
        for dist in [self.dist1, self.dist2] {
            if let EdgeDistribution::Powerlaw { a, b, c, d } = dist {
                check_quadrants(a, b, c, d)?;
            }
        }
        let cap = capacity(self.n);
        for m in self.layer_edges() {
            if m > cap {
                return Err(Error::Capacity {
                    requested: m,
                    n: self.n,
                    capacity: cap,
                });
            }
        }
        Ok(())
    }

    /// Random edges requested for each layer, `round(p / 100 * base_edges)`.
    pub fn layer_edges(&self) -> [u64; 2] {
        self.split.map(|p| (p as u64 * self.base_edges + 50) / 100)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: GenSpec =
            toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: GenSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Sidecar written next to generated layer files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n: usize,
    pub layers: Vec<String>,
    pub seed: u64,
    pub spec: GenSpec,
}

pub fn capacity(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

fn check_quadrants(a: f64, b: f64, c: f64, d: f64) -> Result<()> {
    let probs = [a, b, c, d];
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrant probabilities must be non-negative, got {probs:?}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "quadrant probabilities sum to {total}, expected 1"
        )));
    }
    Ok(())
}

fn check_capacity(n: usize, m: u64) -> Result<()> {
    let cap = capacity(n);
    if m > cap {
        return Err(Error::Capacity {
            requested: m,
            n,
            capacity: cap,
        });
    }
    Ok(())
}

#[inline]
fn pair_key(u: VertexId, v: VertexId) -> u64 {
    let (lo, hi) = if u < v { (u, v) } else { (v, u) };
    ((lo as u64) << 32) | hi as u64
}

fn unkey(key: u64) -> (VertexId, VertexId) {
    ((key >> 32) as VertexId, key as VertexId)
}

fn layer_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn rmat_edges<R: Rng>(rng: &mut R, n: usize, m: u64, probs: [f64; 4]) -> Result<Vec<u64>> {
    let [a, b, c, _] = probs;
    let (ab, abc) = (a + b, a + b + c);
    let levels = n.next_power_of_two().trailing_zeros();
    let mut seen: HashSet<u64> = HashSet::with_capacity(m as usize);
    let mut keys = Vec::with_capacity(m as usize);
    // Skewed quadrants can make some pairs nearly impossible to draw.
    let max_draws = m.saturating_mul(1000).max(1_000_000);
    let mut draws = 0u64;
    while (keys.len() as u64) < m {
        draws += 1;
        if draws > max_draws {
            return Err(Error::InvalidParameter(format!(
                "RMAT placed only {} of {m} edges after {max_draws} draws",
                keys.len()
            )));
        }
        let (mut u, mut v) = (0usize, 0usize);
        for _ in 0..levels {
            let r: f64 = rng.random();
            let (row, col) = if r < a {
                (0, 0)
            } else if r < ab {
                (0, 1)
            } else if r < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            u = (u << 1) | row;
            v = (v << 1) | col;
        }
        if u >= n || v >= n || u == v {
            continue;
        }
        let key = pair_key(u as VertexId, v as VertexId);
        if seen.insert(key) {
            keys.push(key);
        }
    }
    Ok(keys)
}

fn uniform_edges<R: Rng>(rng: &mut R, n: usize, m: u64) -> Vec<u64> {
    let cap = capacity(n);
    let mut draw_distinct = |count: u64| {
        let mut seen: HashSet<u64> = HashSet::with_capacity(count as usize);
        let mut keys = Vec::with_capacity(count as usize);
        while (keys.len() as u64) < count {
            let u = rng.random_range(0..n) as VertexId;
            let v = rng.random_range(0..n) as VertexId;
            if u != v && seen.insert(pair_key(u, v)) {
                keys.push(pair_key(u, v));
            }
        }
        (seen, keys)
    };
    if 2 * m <= cap {
        draw_distinct(m).1
    } else {
        // Dense request: sample the pairs to leave out instead.
        let (excluded, _) = draw_distinct(cap - m);
        let n32 = n as VertexId;
        (0..n32)
            .flat_map(|u| (u + 1..n32).map(move |v| pair_key(u, v)))
            .filter(|k| !excluded.contains(k))
            .collect()
    }
}

fn build(n: usize, keys: impl IntoIterator<Item = u64>) -> UndirectedGraph {
    UndirectedGraph::from_edges(n, keys.into_iter().map(unkey)).expect("generated ids are below n")
}

/// Recursive-matrix generator: each edge descends `log2(next_pow2(n))`
/// levels, picking quadrant a/b/c/d per level. Out-of-range ids, self-loops
/// and repeats are redrawn, so the result has exactly `m` edges.
pub fn gen_rmat(
    n: usize,
    m: u64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    seed: u64,
) -> Result<UndirectedGraph> {
    check_quadrants(a, b, c, d)?;
    check_capacity(n, m)?;
    let mut rng = layer_rng(seed, 0);
    Ok(build(n, rmat_edges(&mut rng, n, m, [a, b, c, d])?))
}

/// `m` distinct edges drawn uniformly without replacement.
pub fn gen_uniform(n: usize, m: u64, seed: u64) -> Result<UndirectedGraph> {
    check_capacity(n, m)?;
    let mut rng = layer_rng(seed, 0);
    Ok(build(n, uniform_edges(&mut rng, n, m)))
}

fn layer_keys(dist: EdgeDistribution, n: usize, m: u64, rng: &mut ChaCha20Rng) -> Result<Vec<u64>> {
    match dist {
        EdgeDistribution::Powerlaw { a, b, c, d } => rmat_edges(rng, n, m, [a, b, c, d]),
        EdgeDistribution::Uniform => Ok(uniform_edges(rng, n, m)),
    }
}

pub fn gen_mln(spec: &GenSpec) -> Result<HoMln> {
    spec.validate()?;
    let n = spec.n;
    let layers = [spec.dist1, spec.dist2]
        .into_iter()
        .zip(spec.layer_edges())
        .enumerate()
        .map(|(i, (dist, m))| {
            let mut rng = layer_rng(spec.seed, i as u64 + 1);
            let mut keys = layer_keys(dist, n, m, &mut rng)?;
            if spec.path_overlay {
                keys.extend((1..n as VertexId).map(|v| pair_key(v - 1, v)));
            }
            Ok(build(n, keys))
        })
        .collect::<Result<Vec<_>>>()?;
    HoMln::from_layers(layers)
}
