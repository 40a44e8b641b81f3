//! Closeness-centrality hubs of Boolean-AND aggregated multilayer networks.
//!
//! Each layer is analyzed once ([`analysis::analyze_layer`]); hub sets of any
//! AND combination of layers are then estimated from the stored summaries
//! alone ([`compose`]). [`eval`] computes the exact answer on the aggregated
//! graph for comparison, and [`synth`] builds synthetic test networks.

pub mod analysis;
pub mod compose;
pub mod error;
pub mod eval;
pub mod graph;
pub mod synth;

pub use analysis::{
    analyze_layer, bfs_distance_sum, load_summary, save_summary, wf_closeness, DistanceSum,
    LayerSummary,
};
pub use compose::{
    compose_cc1, compose_cc2, compose_multi, compose_naive, deg_dist_profile, CompositionResult,
    DegDistProfile, Method, Selection,
};
pub use error::{Error, Result};
pub use eval::{
    brute_force_closeness, evaluate, ground_truth, jaccard, prf1, run_ensemble, run_experiment,
    EvalReport, GroundTruth, TimingBreakdown,
};
pub use graph::{
    and_aggregate, or_aggregate, parse_edge_list, write_edge_list, HoMln, UndirectedGraph, VertexId,
};
pub use synth::{gen_mln, gen_rmat, gen_uniform, EdgeDistribution, GenSpec, Manifest};
