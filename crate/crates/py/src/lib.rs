//! Python bindings: graphs, layer summaries, composition and evaluation.

use pyo3::exceptions::{PyIndexError, PyOSError, PyValueError};
use pyo3::prelude::*;

use mlncc::{
    analyze_layer, compose_multi, evaluate, gen_mln, jaccard as jaccard_rs, prf1 as prf1_rs,
    CompositionResult, GenSpec, GroundTruth, HoMln, LayerSummary, Method, Selection,
    UndirectedGraph, VertexId,
};

fn to_py(err: mlncc::Error) -> PyErr {
    match err {
        mlncc::Error::Io(e) => PyOSError::new_err(e.to_string()),
        mlncc::Error::VertexOutOfRange { .. } | mlncc::Error::LayerOutOfRange { .. } => {
            PyIndexError::new_err(err.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn selection(selection: &str, k: Option<usize>) -> PyResult<Selection> {
    let name = selection.replace('_', "-");
    Selection::from_parts(&name, k).map_err(to_py)
}

/// Simple undirected graph on vertices `0..n`.
#[pyclass(name = "Graph", module = "mlncc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: UndirectedGraph,
}

#[pymethods]
impl PyGraph {
    /// Self-loops and duplicate edges are dropped.
    #[new]
    #[pyo3(signature = (n, edges=Vec::new()))]
    fn new(n: usize, edges: Vec<(VertexId, VertexId)>) -> PyResult<Self> {
        let inner = UndirectedGraph::from_edges(n, edges).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Parses an edge-list file.
    #[staticmethod]
    #[pyo3(signature = (path, n=None))]
    fn read(path: &str, n: Option<usize>) -> PyResult<Self> {
        let file =
            std::fs::File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        let parsed = mlncc::parse_edge_list(std::io::BufReader::new(file), n).map_err(to_py)?;
        Ok(Self {
            inner: parsed.graph,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        let file =
            std::fs::File::create(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        mlncc::write_edge_list(&self.inner, std::io::BufWriter::new(file)).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn neighbors(&self, u: VertexId) -> PyResult<Vec<VertexId>> {
        self.check(u)?;
        Ok(self.inner.neighbors(u).to_vec())
    }

    fn degree(&self, u: VertexId) -> PyResult<usize> {
        self.check(u)?;
        Ok(self.inner.degree(u))
    }

    fn has_edge(&self, u: VertexId, v: VertexId) -> PyResult<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.inner.has_edge(u, v))
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.inner.edges().collect()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn closeness(&self, u: VertexId) -> PyResult<f64> {
        mlncc::wf_closeness(&self.inner, u).map_err(to_py)
    }

    fn __and__(&self, other: &PyGraph) -> PyResult<PyGraph> {
        let inner = mlncc::and_aggregate(&self.inner, &other.inner).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __or__(&self, other: &PyGraph) -> PyResult<PyGraph> {
        let inner = mlncc::or_aggregate(&self.inner, &other.inner).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __eq__(&self, other: &PyGraph) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

impl PyGraph {
    fn check(&self, u: VertexId) -> PyResult<()> {
        if (u as usize) < self.inner.n() {
            Ok(())
        } else {
            Err(PyIndexError::new_err(format!(
                "vertex {u} out of range for n={}",
                self.inner.n()
            )))
        }
    }
}

/// Per-layer degrees, distance sums, closeness and hubs.
#[pyclass(name = "LayerSummary", module = "mlncc", frozen)]
struct PyLayerSummary {
    inner: LayerSummary,
}

#[pymethods]
impl PyLayerSummary {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = LayerSummary::from_json_str(text).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn deg(&self) -> Vec<u32> {
        self.inner.deg.clone()
    }

    #[getter]
    fn sum_dist(&self) -> Vec<u64> {
        self.inner.sum_dist.clone()
    }

    #[getter]
    fn closeness(&self) -> Vec<f64> {
        self.inner.closeness.clone()
    }

    #[getter]
    fn avg_closeness(&self) -> f64 {
        self.inner.avg_closeness
    }

    #[getter]
    fn cc_nodes(&self) -> Vec<VertexId> {
        self.inner.cc_nodes.clone()
    }

    fn neighborhood(&self, u: VertexId) -> Option<Vec<VertexId>> {
        self.inner.cc_neighborhoods.get(&u).cloned()
    }

    fn __repr__(&self) -> String {
        format!(
            "LayerSummary(n={}, hubs={})",
            self.inner.n,
            self.inner.cc_nodes.len()
        )
    }
}

/// Output of one composition call.
#[pyclass(name = "CompositionResult", module = "mlncc", frozen)]
struct PyCompositionResult {
    inner: CompositionResult,
}

#[pymethods]
impl PyCompositionResult {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = CompositionResult::from_json_str(text).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn est_cc_nodes(&self) -> Vec<VertexId> {
        self.inner.est_cc_nodes.clone()
    }

    #[getter]
    fn est_scores(&self) -> Option<Vec<f64>> {
        self.inner.est_scores.clone()
    }

    #[getter]
    fn elapsed_s(&self) -> f64 {
        self.inner.elapsed_s
    }

    fn __repr__(&self) -> String {
        format!(
            "CompositionResult(method={}, hubs={})",
            self.inner.method,
            self.inner.est_cc_nodes.len()
        )
    }
}

/// Exact hubs of an AND-aggregated network.
#[pyclass(name = "GroundTruth", module = "mlncc", frozen)]
struct PyGroundTruth {
    inner: GroundTruth,
}

#[pymethods]
impl PyGroundTruth {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = GroundTruth::from_json_str(text).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn cc_nodes(&self) -> Vec<VertexId> {
        self.inner.cc_nodes.clone()
    }

    #[getter]
    fn and_edges(&self) -> usize {
        self.inner.and_edges
    }

    #[getter]
    fn t_gt(&self) -> f64 {
        self.inner.timing.t_gt()
    }
}

/// Analyzes one layer. Runs on the Rust worker pool without the GIL.
#[pyfunction(name = "analyze_layer")]
fn py_analyze_layer(py: Python<'_>, graph: &PyGraph) -> PyLayerSummary {
    let g = graph.inner.clone();
    let inner = py.detach(move || analyze_layer(&g));
    PyLayerSummary { inner }
}

/// Composes two or more summaries with `naive`, `cc1` or `cc2`.
#[pyfunction]
#[pyo3(signature = (summaries, method, selection="above-average", k=None))]
fn compose(
    summaries: Vec<PyRef<'_, PyLayerSummary>>,
    method: &str,
    selection: &str,
    k: Option<usize>,
) -> PyResult<PyCompositionResult> {
    let method: Method = method.parse().map_err(to_py)?;
    let sel = self::selection(selection, k)?;
    let refs: Vec<&LayerSummary> = summaries.iter().map(|s| &s.inner).collect();
    let inner = compose_multi(&refs, method, sel).map_err(to_py)?;
    Ok(PyCompositionResult { inner })
}

/// Builds the two layers described by a JSON generator spec.
#[pyfunction]
fn generate(py: Python<'_>, spec_json: &str) -> PyResult<Vec<PyGraph>> {
    let spec = GenSpec::from_json_str(spec_json).map_err(to_py)?;
    let mln = py.detach(|| gen_mln(&spec)).map_err(to_py)?;
    Ok(mln
        .layers()
        .iter()
        .map(|g| PyGraph { inner: g.clone() })
        .collect())
}

#[pyfunction]
#[pyo3(signature = (n, m, seed, a=0.57, b=0.19, c=0.19, d=0.05))]
fn gen_rmat(n: usize, m: u64, seed: u64, a: f64, b: f64, c: f64, d: f64) -> PyResult<PyGraph> {
    let inner = mlncc::gen_rmat(n, m, a, b, c, d, seed).map_err(to_py)?;
    Ok(PyGraph { inner })
}

#[pyfunction]
fn gen_uniform(n: usize, m: u64, seed: u64) -> PyResult<PyGraph> {
    let inner = mlncc::gen_uniform(n, m, seed).map_err(to_py)?;
    Ok(PyGraph { inner })
}

/// Exact hubs of the AND of all given layers.
#[pyfunction]
fn ground_truth(py: Python<'_>, layers: Vec<PyRef<'_, PyGraph>>) -> PyResult<PyGroundTruth> {
    let graphs: Vec<UndirectedGraph> = layers.iter().map(|g| g.inner.clone()).collect();
    let count = graphs.len();
    let run = py
        .detach(move || {
            let mln = HoMln::from_layers(graphs)?;
            mlncc::ground_truth(&mln, &(0..count).collect::<Vec<_>>())
        })
        .map_err(to_py)?;
    Ok(PyGroundTruth { inner: run.truth })
}

/// Accuracy and timing of a composition result, as a JSON string.
#[pyfunction(name = "evaluate")]
#[pyo3(signature = (result, truth, t_psi=Vec::new()))]
fn py_evaluate(
    result: &PyCompositionResult,
    truth: &PyGroundTruth,
    t_psi: Vec<f64>,
) -> PyResult<String> {
    let report = evaluate(&result.inner, &truth.inner, t_psi).map_err(to_py)?;
    Ok(report.to_json_string())
}

#[pyfunction]
fn jaccard(a: Vec<VertexId>, b: Vec<VertexId>) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    jaccard_rs(&a, &b)
}

/// `(precision, recall, f1)` of `est` against `gt`.
#[pyfunction]
fn prf1(est: Vec<VertexId>, gt: Vec<VertexId>) -> (f64, f64, f64) {
    let p = prf1_rs(&sorted(est), &sorted(gt));
    (p.precision, p.recall, p.f1)
}

fn sorted(mut v: Vec<VertexId>) -> Vec<VertexId> {
    v.sort_unstable();
    v.dedup();
    v
}

#[pymodule]
#[pyo3(name = "mlncc")]
fn mlncc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyLayerSummary>()?;
    m.add_class::<PyCompositionResult>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_function(wrap_pyfunction!(py_analyze_layer, m)?)?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(gen_rmat, m)?)?;
    m.add_function(wrap_pyfunction!(gen_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(ground_truth, m)?)?;
    m.add_function(wrap_pyfunction!(py_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(prf1, m)?)?;
    Ok(())
}
