//! Estimating the closeness hubs of an AND-aggregated graph from layer
//! summaries alone.
//!
//! Every function here takes [`LayerSummary`] values and nothing else, so a
//! composition can run long after the layer graphs themselves are gone.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{above_average, mean, LayerSummary};
use crate::error::{Error, Result};
use crate::graph::VertexId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Cc1,
    Cc2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Naive, Method::Cc1, Method::Cc2];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Cc1 => "cc1",
            Method::Cc2 => "cc2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Method::Naive),
            "cc1" => Ok(Method::Cc1),
            "cc2" => Ok(Method::Cc2),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// How CC2 turns estimated scores into a hub set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    #[default]
    AboveAverage,
    TopK(usize),
}

impl Selection {
    pub fn name(self) -> &'static str {
        match self {
            Selection::AboveAverage => "above-average",
            Selection::TopK(_) => "top-k",
        }
    }

    pub fn k(self) -> Option<usize> {
        match self {
            Selection::AboveAverage => None,
            Selection::TopK(k) => Some(k),
        }
    }

    pub fn from_parts(name: &str, k: Option<usize>) -> Result<Self> {
        match name {
            "above-average" => Ok(Selection::AboveAverage),
            "top-k" => k
                .map(Selection::TopK)
                .ok_or_else(|| Error::InvalidParameter("top-k selection needs k".into())),
            other => Err(Error::InvalidParameter(format!(
                "unknown selection {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositionResult {
    pub method: Method,
    pub n: usize,
    /// Ascending.
    pub est_cc_nodes: Vec<VertexId>,
    /// Per-vertex estimated closeness; only CC2 produces scores.
    pub est_scores: Option<Vec<f64>>,
    /// Wall time of the composition call in seconds.
    pub elapsed_s: f64,
    pub selection: Selection,
}

#[derive(Serialize, Deserialize)]
struct ResultDoc {
    method: Method,
    n: usize,
    est_cc_nodes: Vec<VertexId>,
    est_scores: Option<Vec<f64>>,
    elapsed_s: f64,
    selection: String,
    k: Option<usize>,
}

impl CompositionResult {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&ResultDoc {
            method: self.method,
            n: self.n,
            est_cc_nodes: self.est_cc_nodes.clone(),
            est_scores: self.est_scores.clone(),
            elapsed_s: self.elapsed_s,
            selection: self.selection.name().to_owned(),
            k: self.selection.k(),
        })
        .expect("result serialization is infallible")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: ResultDoc = serde_json::from_str(text)?;
        let selection = Selection::from_parts(&doc.selection, doc.k)?;
        if doc.est_cc_nodes.windows(2).any(|w| w[0] >= w[1])
            || doc
                .est_cc_nodes
                .last()
                .is_some_and(|&v| v as usize >= doc.n)
        {
            return Err(Error::Schema(
                "est_cc_nodes must be ascending ids below n".into(),
            ));
        }
        if doc.method == Method::Naive && doc.est_scores.is_some() {
            return Err(Error::Schema("naive results carry no scores".into()));
        }
        if doc.est_scores.as_ref().is_some_and(|s| s.len() != doc.n) {
            return Err(Error::Schema("est_scores length differs from n".into()));
        }
        Ok(Self {
            method: doc.method,
            n: doc.n,
            est_cc_nodes: doc.est_cc_nodes,
            est_scores: doc.est_scores,
            elapsed_s: doc.elapsed_s,
            selection,
        })
    }
}

/// Degree-distance ratios of both layers against the cross-layer minimum
/// degree, which bounds a vertex's degree in the AND graph.
#[derive(Clone, Debug, PartialEq)]
pub struct DegDistProfile {
    /// `f64::INFINITY` where the minimum degree is zero.
    pub ratio_x: Vec<f64>,
    pub ratio_y: Vec<f64>,
    pub avg_ratio_combined: f64,
}

fn check_pair(sx: &LayerSummary, sy: &LayerSummary) -> Result<()> {
    if sx.n != sy.n {
        return Err(Error::DimensionMismatch {
            left: sx.n,
            right: sy.n,
        });
    }
    Ok(())
}

fn finite_mean(values: &[f64]) -> Option<f64> {
    let (sum, count) = values
        .iter()
        .filter(|r| r.is_finite())
        .fold((0.0, 0usize), |(s, c), &r| (s + r, c + 1));
    (count > 0).then(|| sum / count as f64)
}

pub fn deg_dist_profile(sx: &LayerSummary, sy: &LayerSummary) -> Result<DegDistProfile> {
    check_pair(sx, sy)?;
    let ratios = |sum_dist: &[u64]| -> Vec<f64> {
        sum_dist
            .iter()
            .zip(sx.deg.iter().zip(&sy.deg))
            .map(|(&s, (&dx, &dy))| match dx.min(dy) {
                0 => f64::INFINITY,
                d => s as f64 / d as f64,
            })
            .collect()
    };
    let ratio_x = ratios(&sx.sum_dist);
    let ratio_y = ratios(&sy.sum_dist);
    let avg_ratio_combined = match (finite_mean(&ratio_x), finite_mean(&ratio_y)) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0.0,
    };
    Ok(DegDistProfile {
        ratio_x,
        ratio_y,
        avg_ratio_combined,
    })
}

fn sorted_intersection(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Intersection of the layers' own hub sets.
pub fn compose_naive(sx: &LayerSummary, sy: &LayerSummary) -> Result<CompositionResult> {
    check_pair(sx, sy)?;
    let start = Instant::now();
    let est = sorted_intersection(&sx.cc_nodes, &sy.cc_nodes);
    Ok(CompositionResult {
        method: Method::Naive,
        n: sx.n,
        est_cc_nodes: est,
        est_scores: None,
        elapsed_s: start.elapsed().as_secs_f64(),
        selection: Selection::AboveAverage,
    })
}

fn central_neighbors<'a>(
    s: &'a LayerSummary,
    u: VertexId,
    ratio: &'a [f64],
    threshold: f64,
) -> Result<impl Iterator<Item = VertexId> + 'a> {
    let nbd = s
        .cc_neighborhoods
        .get(&u)
        .ok_or(Error::MissingNeighborhood(u))?;
    Ok(nbd
        .iter()
        .copied()
        .filter(move |&v| ratio[v as usize] < threshold))
}

/// Common hubs of both layers, plus their shared "central" neighbors when at
/// least two such neighbors overlap. A neighbor is central when its own
/// degree-distance ratio is below the combined average.
pub fn compose_cc1(sx: &LayerSummary, sy: &LayerSummary) -> Result<CompositionResult> {
    check_pair(sx, sy)?;
    let start = Instant::now();
    let profile = deg_dist_profile(sx, sy)?;
    let threshold = profile.avg_ratio_combined;

    let mut est = BTreeSet::new();
    for u in sorted_intersection(&sx.cc_nodes, &sy.cc_nodes) {
        let cand_x: Vec<VertexId> =
            central_neighbors(sx, u, &profile.ratio_x, threshold)?.collect();
        let cand_y: Vec<VertexId> =
            central_neighbors(sy, u, &profile.ratio_y, threshold)?.collect();
        let overlap = sorted_intersection(&cand_x, &cand_y);
        if overlap.len() > 1 {
            est.extend(overlap);
        }
        est.insert(u);
    }
    Ok(CompositionResult {
        method: Method::Cc1,
        n: sx.n,
        est_cc_nodes: est.into_iter().collect(),
        est_scores: None,
        elapsed_s: start.elapsed().as_secs_f64(),
        selection: Selection::AboveAverage,
    })
}

/// Closeness `(n-1)/est_sum` of each estimated distance sum.
pub fn scores_from_sums(n: usize, est_sum: &[u64]) -> Vec<f64> {
    let numer = n.saturating_sub(1) as f64;
    est_sum
        .iter()
        .map(|&s| if s == 0 { 0.0 } else { numer / s as f64 })
        .collect()
}

fn select(est_sum: &[u64], scores: &[f64], selection: Selection) -> Result<Vec<VertexId>> {
    let n = est_sum.len();
    match selection {
        Selection::AboveAverage => Ok(above_average(scores, mean(scores))),
        Selection::TopK(k) => {
            if k == 0 || k > n {
                return Err(Error::InvalidParameter(format!(
                    "top-k needs 1 <= k <= n, got k={k}, n={n}"
                )));
            }
            // Score is strictly decreasing in the sum, so the k highest
            // scores are the k smallest nonzero sums; ties go to lower ids.
            let key = |u: usize| match est_sum[u] {
                0 => u64::MAX,
                s => s,
            };
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&u| (key(u), u));
            let mut chosen: Vec<VertexId> = order[..k].iter().map(|&u| u as VertexId).collect();
            chosen.sort_unstable();
            Ok(chosen)
        }
    }
}

fn cc2_from_sums(
    n: usize,
    est_sum: Vec<u64>,
    selection: Selection,
    start: Instant,
) -> Result<CompositionResult> {
    let scores = scores_from_sums(n, &est_sum);
    let est = select(&est_sum, &scores, selection)?;
    Ok(CompositionResult {
        method: Method::Cc2,
        n,
        est_cc_nodes: est,
        est_scores: Some(scores),
        elapsed_s: start.elapsed().as_secs_f64(),
        selection,
    })
}

/// Per-vertex max of the layers' distance sums, a lower bound on the vertex's
/// distance sum in the AND graph.
pub fn estimated_sum_dist(summaries: &[&LayerSummary]) -> Vec<u64> {
    let Some(first) = summaries.first() else {
        return Vec::new();
    };
    let mut est = first.sum_dist.clone();
    for s in &summaries[1..] {
        for (e, &d) in est.iter_mut().zip(&s.sum_dist) {
            *e = (*e).max(d);
        }
    }
    est
}

pub fn compose_cc2(
    sx: &LayerSummary,
    sy: &LayerSummary,
    selection: Selection,
) -> Result<CompositionResult> {
    check_pair(sx, sy)?;
    let start = Instant::now();
    let est_sum = estimated_sum_dist(&[sx, sy]);
    cc2_from_sums(sx.n, est_sum, selection, start)
}

/// Composition over two or more layers. Naive and CC2 fold associatively;
/// CC1 is defined for exactly two layers only.
pub fn compose_multi(
    summaries: &[&LayerSummary],
    method: Method,
    selection: Selection,
) -> Result<CompositionResult> {
    if summaries.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "composition needs at least two summaries, got {}",
            summaries.len()
        )));
    }
    let n = summaries[0].n;
    for s in &summaries[1..] {
        if s.n != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: s.n,
            });
        }
    }
    match method {
        Method::Cc1 if summaries.len() == 2 => compose_cc1(summaries[0], summaries[1]),
        Method::Cc1 => Err(Error::Unsupported(format!(
            "cc1 composes exactly two layers, got {}",
            summaries.len()
        ))),
        Method::Naive => {
            let start = Instant::now();
            let mut est = summaries[0].cc_nodes.clone();
            for s in &summaries[1..] {
                est = sorted_intersection(&est, &s.cc_nodes);
            }
            Ok(CompositionResult {
                method,
                n,
                est_cc_nodes: est,
                est_scores: None,
                elapsed_s: start.elapsed().as_secs_f64(),
                selection: Selection::AboveAverage,
            })
        }
        Method::Cc2 => {
            let start = Instant::now();
            let est_sum = estimated_sum_dist(summaries);
            cc2_from_sums(n, est_sum, selection, start)
        }
    }
}
