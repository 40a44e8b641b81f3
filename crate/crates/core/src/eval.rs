//! Ground truth, accuracy metrics, the Floyd-Warshall oracle and the
//! experiment driver with its timing accounting.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_layer, LayerSummary};
use crate::compose::{compose_multi, CompositionResult, Method, Selection};
use crate::error::{Error, Result};
use crate::graph::{HoMln, UndirectedGraph, VertexId};
use crate::synth::{gen_mln, GenSpec};

/// Hub set of the exact AND graph plus the time spent building it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub n: usize,
    pub cc_nodes: Vec<VertexId>,
    pub and_edges: usize,
    pub timing: GtTiming,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GtTiming {
    pub t_gt_aggregate: f64,
    pub t_gt_cc: f64,
}

impl GtTiming {
    pub fn t_gt(&self) -> f64 {
        self.t_gt_aggregate + self.t_gt_cc
    }
}

#[derive(Serialize, Deserialize)]
struct GtTimingDoc {
    t_gt_aggregate: f64,
    t_gt_cc: f64,
    #[serde(default, skip_deserializing)]
    t_gt: f64,
}

impl Serialize for GtTiming {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GtTimingDoc {
            t_gt_aggregate: self.t_gt_aggregate,
            t_gt_cc: self.t_gt_cc,
            t_gt: self.t_gt(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GtTiming {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = GtTimingDoc::deserialize(d)?;
        Ok(GtTiming {
            t_gt_aggregate: doc.t_gt_aggregate,
            t_gt_cc: doc.t_gt_cc,
        })
    }
}

impl GroundTruth {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("ground truth serialization is infallible")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Ground truth along with the intermediates it was computed from.
#[derive(Clone, Debug)]
pub struct GroundTruthRun {
    pub truth: GroundTruth,
    pub and_graph: UndirectedGraph,
    pub and_summary: LayerSummary,
}

/// AND-aggregates the selected layers and takes the above-average closeness
/// vertices of the result, using the same analysis routine as for layers.
pub fn ground_truth(mln: &HoMln, layer_indices: &[usize]) -> Result<GroundTruthRun> {
    if layer_indices.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "ground truth needs at least two layers, got {}",
            layer_indices.len()
        )));
    }
    if let Some(&bad) = layer_indices.iter().find(|&&i| i >= mln.num_layers()) {
        return Err(Error::LayerOutOfRange {
            index: bad,
            layers: mln.num_layers(),
        });
    }
    let start = Instant::now();
    let and_graph = mln.and_of(layer_indices)?;
    let t_gt_aggregate = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let and_summary = analyze_layer(&and_graph);
    let t_gt_cc = start.elapsed().as_secs_f64();
    Ok(GroundTruthRun {
        truth: GroundTruth {
            n: mln.n(),
            cc_nodes: and_summary.cc_nodes.clone(),
            and_edges: and_graph.m(),
            timing: GtTiming {
                t_gt_aggregate,
                t_gt_cc,
            },
        },
        and_graph,
        and_summary,
    })
}

/// `|a ∩ b| / |a ∪ b|`; two empty sets agree perfectly.
pub fn jaccard(a: &[VertexId], b: &[VertexId]) -> f64 {
    let a: HashSet<_> = a.iter().collect();
    let b: HashSet<_> = b.iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn prf1(est: &[VertexId], gt: &[VertexId]) -> Prf1 {
    let est: HashSet<_> = est.iter().collect();
    let gt: HashSet<_> = gt.iter().collect();
    let common = est.intersection(&gt).count() as f64;
    let precision = match (est.is_empty(), gt.is_empty()) {
        (true, true) => 1.0,
        (true, false) => 0.0,
        _ => common / est.len() as f64,
    };
    let recall = if gt.is_empty() {
        1.0
    } else {
        common / gt.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf1 {
        precision,
        recall,
        f1,
    }
}

pub const BRUTE_FORCE_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteForceCloseness {
    pub sum_dist: u64,
    pub closeness: f64,
}

/// Independent oracle: Floyd-Warshall all-pairs distances, then the
/// n-penalty sum and the Wasserman-Faust closeness read off each row.
pub fn brute_force_closeness(g: &UndirectedGraph) -> Result<Vec<BruteForceCloseness>> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    const INF: u32 = u32::MAX / 2;
    let mut dist = vec![INF; n * n];
    for u in 0..n {
        dist[u * n + u] = 0;
    }
    for (u, v) in g.edges() {
        let (u, v) = (u as usize, v as usize);
        dist[u * n + v] = 1;
        dist[v * n + u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let through = dik + dist[k * n + j];
                if through < dist[i * n + j] {
                    dist[i * n + j] = through;
                }
            }
        }
    }
    Ok((0..n)
        .map(|u| {
            let row = &dist[u * n..(u + 1) * n];
            let mut sum_dist = 0u64;
            let mut reached = 0u64;
            let mut reached_sum = 0u64;
            for (v, &d) in row.iter().enumerate() {
                if v == u {
                    continue;
                }
                if d == INF {
                    sum_dist += n as u64;
                } else {
                    sum_dist += d as u64;
                    reached += 1;
                    reached_sum += d as u64;
                }
            }
            let closeness = if n <= 1 || reached == 0 {
                0.0
            } else {
                (reached * reached) as f64 / ((n as u64 - 1) * reached_sum) as f64
            };
            BruteForceCloseness {
                sum_dist,
                closeness,
            }
        })
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimingBreakdown {
    /// Per-layer analysis wall time.
    pub t_psi: Vec<f64>,
    pub t_theta: f64,
    pub t_gt_aggregate: f64,
    pub t_gt_cc: f64,
}

impl TimingBreakdown {
    /// Layers are analyzed in parallel, so the slowest one bounds the
    /// decoupled pipeline.
    pub fn t_decoupled(&self) -> f64 {
        self.t_psi.iter().copied().fold(0.0, f64::max) + self.t_theta
    }

    pub fn t_gt(&self) -> f64 {
        self.t_gt_aggregate + self.t_gt_cc
    }

    pub fn min_psi(&self) -> f64 {
        self.t_psi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Composition time relative to the fastest layer analysis.
    pub fn theta_over_min_psi(&self) -> f64 {
        let min = self.min_psi();
        if min > 0.0 && min.is_finite() {
            self.t_theta / min
        } else {
            f64::NAN
        }
    }
}

#[derive(Serialize)]
struct TimingDocRef<'a> {
    t_psi: &'a [f64],
    t_theta: f64,
    t_decoupled: f64,
    t_gt_aggregate: f64,
    t_gt_cc: f64,
    t_gt: f64,
    theta_over_min_psi: Option<f64>,
}

#[derive(Deserialize)]
struct TimingDoc {
    t_psi: Vec<f64>,
    t_theta: f64,
    t_gt_aggregate: f64,
    t_gt_cc: f64,
}

impl Serialize for TimingBreakdown {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let ratio = self.theta_over_min_psi();
        TimingDocRef {
            t_psi: &self.t_psi,
            t_theta: self.t_theta,
            t_decoupled: self.t_decoupled(),
            t_gt_aggregate: self.t_gt_aggregate,
            t_gt_cc: self.t_gt_cc,
            t_gt: self.t_gt(),
            theta_over_min_psi: ratio.is_finite().then_some(ratio),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TimingBreakdown {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TimingDoc::deserialize(d)?;
        Ok(TimingBreakdown {
            t_psi: doc.t_psi,
            t_theta: doc.t_theta,
            t_gt_aggregate: doc.t_gt_aggregate,
            t_gt_cc: doc.t_gt_cc,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSizes {
    pub est: usize,
    pub gt: usize,
    pub common: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub jaccard: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub sizes: SetSizes,
    pub timing: TimingBreakdown,
}

impl EvalReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("report serialization is infallible")
    }
}

/// Scores a composition against ground truth. `t_psi` are the layer
/// analysis times that fed the composition (may be empty when unknown).
pub fn evaluate(
    result: &CompositionResult,
    truth: &GroundTruth,
    t_psi: Vec<f64>,
) -> Result<EvalReport> {
    if result.n != truth.n {
        return Err(Error::DimensionMismatch {
            left: result.n,
            right: truth.n,
        });
    }
    let est = &result.est_cc_nodes;
    let gt = &truth.cc_nodes;
    let common = {
        let g: HashSet<_> = gt.iter().collect();
        est.iter().filter(|v| g.contains(v)).count()
    };
    let Prf1 {
        precision,
        recall,
        f1,
    } = prf1(est, gt);
    Ok(EvalReport {
        method: result.method,
        jaccard: jaccard(est, gt),
        precision,
        recall,
        f1,
        sizes: SetSizes {
            est: est.len(),
            gt: gt.len(),
            common,
        },
        timing: TimingBreakdown {
            t_psi,
            t_theta: result.elapsed_s,
            t_gt_aggregate: truth.timing.t_gt_aggregate,
            t_gt_cc: truth.timing.t_gt_cc,
        },
    })
}

/// Layer summaries with the wall time each took.
pub fn analyze_layers_timed(layers: &[&UndirectedGraph]) -> Vec<(LayerSummary, f64)> {
    layers
        .par_iter()
        .map(|g| {
            let start = Instant::now();
            let s = analyze_layer(g);
            (s, start.elapsed().as_secs_f64())
        })
        .collect()
}

/// Runs one composition twice and keeps the second, so one-off costs such as
/// page faults on fresh allocations stay out of the measurement.
pub fn timed_compose(
    summaries: &[&LayerSummary],
    method: Method,
    selection: Selection,
) -> Result<CompositionResult> {
    compose_multi(summaries, method, selection)?;
    compose_multi(summaries, method, selection)
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub summaries: Vec<LayerSummary>,
    pub t_psi: Vec<f64>,
    pub results: Vec<CompositionResult>,
    pub truth: GroundTruth,
    pub reports: Vec<EvalReport>,
}

/// Full decoupled pipeline on every layer of `mln` versus the exact ground
/// truth, one report per method.
pub fn run_experiment(mln: &HoMln, methods: &[Method], selection: Selection) -> Result<Experiment> {
    if mln.num_layers() < 2 {
        return Err(Error::InvalidParameter(
            "an experiment needs at least two layers".into(),
        ));
    }
    let layers: Vec<&UndirectedGraph> = mln.layers().iter().collect();
    let (summaries, t_psi): (Vec<_>, Vec<_>) = analyze_layers_timed(&layers).into_iter().unzip();
    let refs: Vec<&LayerSummary> = summaries.iter().collect();
    let results = methods
        .iter()
        .map(|&m| timed_compose(&refs, m, selection))
        .collect::<Result<Vec<_>>>()?;
    let indices: Vec<usize> = (0..mln.num_layers()).collect();
    let truth = ground_truth(mln, &indices)?.truth;
    let reports = results
        .iter()
        .map(|r| evaluate(r, &truth, t_psi.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Experiment {
        summaries,
        t_psi,
        results,
        truth,
        reports,
    })
}

#[derive(Clone, Debug)]
pub struct InstanceReports {
    pub seed: u64,
    pub reports: Vec<EvalReport>,
}

/// One generated network per seed, experiments spread over the rayon pool.
/// Output order follows `seeds`.
pub fn run_ensemble(
    spec: &GenSpec,
    seeds: &[u64],
    methods: &[Method],
    selection: Selection,
) -> Result<Vec<InstanceReports>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let mln = gen_mln(&GenSpec {
                seed,
                ..spec.clone()
            })?;
            let exp = run_experiment(&mln, methods, selection)?;
            Ok(InstanceReports {
                seed,
                reports: exp.reports,
            })
        })
        .collect()
}

/// Arithmetic means of per-instance metrics for one method.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanRow {
    pub method: Method,
    pub instances: usize,
    pub jaccard: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub t_psi_max: f64,
    pub t_psi_min: f64,
    pub t_theta: f64,
    pub t_decoupled: f64,
    pub t_gt: f64,
    pub theta_over_min_psi: f64,
}

pub fn mean_rows(instances: &[InstanceReports]) -> Vec<MeanRow> {
    let mut methods: Vec<Method> = Vec::new();
    for inst in instances {
        for r in &inst.reports {
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let rows: Vec<&EvalReport> = instances
                .iter()
                .flat_map(|i| i.reports.iter())
                .filter(|r| r.method == method)
                .collect();
            let avg = |f: &dyn Fn(&EvalReport) -> f64| {
                rows.iter().map(|r| f(r)).sum::<f64>() / rows.len() as f64
            };
            MeanRow {
                method,
                instances: rows.len(),
                jaccard: avg(&|r| r.jaccard),
                precision: avg(&|r| r.precision),
                recall: avg(&|r| r.recall),
                f1: avg(&|r| r.f1),
                t_psi_max: avg(&|r| r.timing.t_psi.iter().copied().fold(0.0, f64::max)),
                t_psi_min: avg(&|r| r.timing.min_psi()),
                t_theta: avg(&|r| r.timing.t_theta),
                t_decoupled: avg(&|r| r.timing.t_decoupled()),
                t_gt: avg(&|r| r.timing.t_gt()),
                theta_over_min_psi: avg(&|r| r.timing.theta_over_min_psi()),
            }
        })
        .collect()
}

const REPORT_HEADER: [&str; 17] = [
    "instance",
    "method",
    "jaccard",
    "precision",
    "recall",
    "f1",
    "est",
    "gt",
    "common",
    "t_psi_max",
    "t_psi_min",
    "t_theta",
    "t_decoupled",
    "t_gt_aggregate",
    "t_gt_cc",
    "t_gt",
    "theta_over_min_psi",
];

/// One row per (instance, method).
pub fn write_reports_csv<W: Write>(instances: &[InstanceReports], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(REPORT_HEADER)?;
    for inst in instances {
        for r in &inst.reports {
            let t = &r.timing;
            w.write_record([
                inst.seed.to_string(),
                r.method.to_string(),
                r.jaccard.to_string(),
                r.precision.to_string(),
                r.recall.to_string(),
                r.f1.to_string(),
                r.sizes.est.to_string(),
                r.sizes.gt.to_string(),
                r.sizes.common.to_string(),
                t.t_psi.iter().copied().fold(0.0, f64::max).to_string(),
                t.min_psi().to_string(),
                t.t_theta.to_string(),
                t.t_decoupled().to_string(),
                t.t_gt_aggregate.to_string(),
                t.t_gt_cc.to_string(),
                t.t_gt().to_string(),
                t.theta_over_min_psi().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_means_csv<W: Write>(rows: &[MeanRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
