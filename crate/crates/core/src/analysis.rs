//! Per-layer analysis: one BFS per source vertex yields both the
//! n-penalty distance sum and the Wasserman-Faust normalized closeness.
//! The resulting [`LayerSummary`] is everything composition ever sees of a
//! layer.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{UndirectedGraph, VertexId};

pub const SUMMARY_VERSION: u32 = 1;

/// Result of one single-source BFS.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistanceSum {
    /// Reachable distances plus `n` for every unreachable vertex.
    pub sum: u64,
    /// Vertices reachable from the source, the source included.
    pub reachable_count: usize,
    pub reachable_dist_sum: u64,
}

/// Reusable BFS state. Visited marks are epoch stamps so the `n` sweeps of
/// [`analyze_layer`] never clear or reallocate.
pub(crate) struct BfsScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<VertexId>,
}

impl BfsScratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            epoch: 0,
            queue: vec![0; n],
        }
    }

    pub(crate) fn run(&mut self, g: &UndirectedGraph, source: VertexId) -> DistanceSum {
        let n = g.n();
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        let offsets = g.offsets();
        let targets = g.targets();
        let stamp = &mut self.stamp[..];
        let queue = &mut self.queue[..];

        stamp[source as usize] = epoch;
        queue[0] = source;
        let (mut head, mut tail) = (0usize, 1usize);
        let mut depth = 0u64;
        let mut dist_sum = 0u64;
        while head < tail {
            let level_end = tail;
            depth += 1;
            while head < level_end {
                let u = queue[head] as usize;
                head += 1;
                for &v in &targets[offsets[u]..offsets[u + 1]] {
                    let s = &mut stamp[v as usize];
                    if *s != epoch {
                        *s = epoch;
                        queue[tail] = v;
                        tail += 1;
                    }
                }
            }
            dist_sum += depth * (tail - level_end) as u64;
        }
        let unreachable = (n - tail) as u64;
        DistanceSum {
            sum: dist_sum + unreachable * n as u64,
            reachable_count: tail,
            reachable_dist_sum: dist_sum,
        }
    }
}

fn check_source(g: &UndirectedGraph, source: VertexId) -> Result<()> {
    if source as usize >= g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: source as u64,
            n: g.n(),
        });
    }
    Ok(())
}

pub fn bfs_distance_sum(g: &UndirectedGraph, source: VertexId) -> Result<DistanceSum> {
    check_source(g, source)?;
    Ok(BfsScratch::new(g.n()).run(g, source))
}

/// Wasserman-Faust closeness `((k-1)/(n-1)) * ((k-1)/S)` where `k` counts
/// reachable vertices (source included) and `S` sums their distances. Equals
/// `(n-1)/S` when everything is reachable.
pub(crate) fn wf_from_reach(n: usize, reach: &DistanceSum) -> f64 {
    let k = reach.reachable_count;
    if n <= 1 || k <= 1 || reach.reachable_dist_sum == 0 {
        return 0.0;
    }
    let reached = (k - 1) as f64;
    let mut c = reached / reach.reachable_dist_sum as f64;
    c *= reached / (n - 1) as f64;
    c
}

pub fn wf_closeness(g: &UndirectedGraph, source: VertexId) -> Result<f64> {
    let reach = bfs_distance_sum(g, source)?;
    Ok(wf_from_reach(g.n(), &reach))
}

/// Everything the composition step needs from one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSummary {
    pub n: usize,
    pub deg: Vec<u32>,
    /// n-penalty distance sums.
    pub sum_dist: Vec<u64>,
    pub closeness: Vec<f64>,
    pub avg_closeness: f64,
    /// Ascending; exactly the vertices with closeness strictly above average.
    pub cc_nodes: Vec<VertexId>,
    pub cc_neighborhoods: BTreeMap<VertexId, Vec<VertexId>>,
}

/// Mean over all `n` entries, isolated vertices included.
pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub(crate) fn above_average(values: &[f64], avg: f64) -> Vec<VertexId> {
    values
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > avg)
        .map(|(u, _)| u as VertexId)
        .collect()
}

/// Runs a BFS from every vertex (in parallel on the current rayon pool) and
/// assembles the layer summary. Output does not depend on the pool size.
pub fn analyze_layer(g: &UndirectedGraph) -> LayerSummary {
    let n = g.n();
    let reaches: Vec<DistanceSum> = (0..n as VertexId)
        .into_par_iter()
        .with_min_len(64)
        .map_init(|| BfsScratch::new(n), |scratch, s| scratch.run(g, s))
        .collect();

    let sum_dist = reaches.iter().map(|r| r.sum).collect();
    let closeness: Vec<f64> = reaches.iter().map(|r| wf_from_reach(n, r)).collect();
    let avg_closeness = mean(&closeness);
    let cc_nodes = above_average(&closeness, avg_closeness);
    let cc_neighborhoods = cc_nodes
        .iter()
        .map(|&u| (u, g.neighbors(u).to_vec()))
        .collect();

    LayerSummary {
        n,
        deg: g.degrees().into_iter().map(|d| d as u32).collect(),
        sum_dist,
        closeness,
        avg_closeness,
        cc_nodes,
        cc_neighborhoods,
    }
}

#[derive(Serialize)]
struct SummaryDocRef<'a> {
    version: u32,
    n: usize,
    deg: &'a [u32],
    sum_dist: &'a [u64],
    closeness: &'a [f64],
    avg_closeness: f64,
    cc_nodes: &'a [VertexId],
    cc_neighborhoods: &'a BTreeMap<VertexId, Vec<VertexId>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SummaryDoc {
    version: u32,
    n: usize,
    deg: Vec<u32>,
    sum_dist: Vec<u64>,
    closeness: Vec<f64>,
    avg_closeness: f64,
    cc_nodes: Vec<VertexId>,
    cc_neighborhoods: BTreeMap<VertexId, Vec<VertexId>>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn strictly_ascending_below(ids: &[VertexId], n: usize) -> bool {
    ids.windows(2).all(|w| w[0] < w[1]) && ids.last().is_none_or(|&v| (v as usize) < n)
}

impl LayerSummary {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.doc()).expect("summary serialization is infallible")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: SummaryDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    fn doc(&self) -> SummaryDocRef<'_> {
        SummaryDocRef {
            version: SUMMARY_VERSION,
            n: self.n,
            deg: &self.deg,
            sum_dist: &self.sum_dist,
            closeness: &self.closeness,
            avg_closeness: self.avg_closeness,
            cc_nodes: &self.cc_nodes,
            cc_neighborhoods: &self.cc_neighborhoods,
        }
    }

    fn from_doc(doc: SummaryDoc) -> Result<Self> {
        if doc.version != SUMMARY_VERSION {
            return Err(schema(format!(
                "unsupported version {} (expected {SUMMARY_VERSION})",
                doc.version
            )));
        }
        let s = LayerSummary {
            n: doc.n,
            deg: doc.deg,
            sum_dist: doc.sum_dist,
            closeness: doc.closeness,
            avg_closeness: doc.avg_closeness,
            cc_nodes: doc.cc_nodes,
            cc_neighborhoods: doc.cc_neighborhoods,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks the structural invariants a summary must satisfy.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for (name, len) in [
            ("deg", self.deg.len()),
            ("sum_dist", self.sum_dist.len()),
            ("closeness", self.closeness.len()),
        ] {
            if len != n {
                return Err(schema(format!("{name} has {len} entries, n={n}")));
            }
        }
        if self.deg.iter().any(|&d| d as usize >= n.max(1)) {
            return Err(schema("degree exceeds n-1"));
        }
        if self
            .closeness
            .iter()
            .any(|c| !c.is_finite() || !(0.0..=1.0).contains(c))
        {
            return Err(schema("closeness outside [0, 1]"));
        }
        if !self.avg_closeness.is_finite() {
            return Err(schema("avg_closeness is not finite"));
        }
        if !strictly_ascending_below(&self.cc_nodes, n) {
            return Err(schema("cc_nodes must be strictly ascending ids below n"));
        }
        if self.cc_nodes != above_average(&self.closeness, self.avg_closeness) {
            return Err(schema("cc_nodes disagree with closeness > avg_closeness"));
        }
        if self.cc_neighborhoods.len() != self.cc_nodes.len()
            || !self
                .cc_nodes
                .iter()
                .all(|u| self.cc_neighborhoods.contains_key(u))
        {
            return Err(schema("cc_neighborhoods must be keyed exactly by cc_nodes"));
        }
        for (&u, nbrs) in &self.cc_neighborhoods {
            if !strictly_ascending_below(nbrs, n) || nbrs.binary_search(&u).is_ok() {
                return Err(schema(format!("bad neighborhood for vertex {u}")));
            }
            if nbrs.len() != self.deg[u as usize] as usize {
                return Err(schema(format!(
                    "neighborhood of {u} disagrees with its degree"
                )));
            }
        }
        Ok(())
    }
}

pub fn save_summary<W: Write>(s: &LayerSummary, mut sink: W) -> Result<()> {
    serde_json::to_writer(&mut sink, &s.doc())?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

pub fn load_summary<R: Read>(source: R) -> Result<LayerSummary> {
    let doc: SummaryDoc = serde_json::from_reader(source)?;
    LayerSummary::from_doc(doc)
}
