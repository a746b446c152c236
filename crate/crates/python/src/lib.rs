//! Python bindings: graphs, sketches and the replica benchmark.

use std::collections::HashMap;
use std::io::Cursor;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tempsketch::hashing::{estimate_similarity, generate_hyperplanes, read_sketches, write_sketches};
use tempsketch::pipeline::{bucket_sketches, Attributes};
use tempsketch::walks::transition_distribution as transitions;
use tempsketch::{
    Edge, EdgeSchema, EmbedParams, Error, EvalParams, LoadOptions, MetricReport, NodeTypeTable, ReplicaParams,
    SketchFormat, SketchMatrix, TemporalGraph, WalkMode, WalkPolicy,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        e if e.is_data_error() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_policy(policy: Option<&str>) -> PyResult<Option<WalkMode>> {
    match policy {
        None | Some("auto") => Ok(None),
        Some(p) => p.parse().map(Some).map_err(to_py),
    }
}

/// A temporal graph with string node labels.
#[pyclass(module = "tempsketch_py", frozen)]
struct Graph {
    inner: TemporalGraph,
}

#[pymethods]
impl Graph {
    /// Builds a graph from `(src, dst)` label pairs; `timestamps` holds one time per edge.
    #[staticmethod]
    #[pyo3(signature = (edges, directed=false, timestamps=None, node_types=None))]
    fn from_edges(
        edges: Vec<(String, String)>,
        directed: bool,
        timestamps: Option<Vec<i64>>,
        node_types: Option<HashMap<String, String>>,
    ) -> PyResult<Self> {
        if let Some(ts) = &timestamps {
            if ts.len() != edges.len() {
                return Err(PyValueError::new_err("timestamps must have one entry per edge"));
            }
        }
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut labels = Vec::new();
        let mut id = |label: &str| -> u32 {
            *index.entry(label.to_string()).or_insert_with(|| {
                labels.push(label.to_string());
                labels.len() as u32 - 1
            })
        };
        let built: Vec<Edge> = edges
            .iter()
            .enumerate()
            .map(|(i, (s, d))| {
                let (s, d) = (id(s), id(d));
                match &timestamps {
                    Some(ts) => Edge::at(s, d, ts[i]),
                    None => Edge::new(s, d),
                }
            })
            .collect();
        let mut type_names: Vec<String> = vec!["default".into()];
        let types: Vec<u32> = labels
            .iter()
            .map(|l| match node_types.as_ref().and_then(|m| m.get(l)) {
                Some(t) => match type_names.iter().position(|n| n == t) {
                    Some(k) => k as u32,
                    None => {
                        type_names.push(t.clone());
                        type_names.len() as u32 - 1
                    }
                },
                None => 0,
            })
            .collect();
        let temporal = timestamps.is_some();
        let inner =
            TemporalGraph::from_labeled_parts(labels, types, type_names, built, vec!["default".into()], directed, temporal)
                .map_err(to_py)?;
        Ok(Graph { inner })
    }

    /// Reads an edge list; `schema` names the whitespace separated columns.
    #[staticmethod]
    #[pyo3(signature = (path, schema="src dst timestamp", directed=false, node_types=None))]
    fn load(path: PathBuf, schema: &str, directed: bool, node_types: Option<PathBuf>) -> PyResult<Self> {
        let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| to_py(Error::io(p, e)));
        let types = match &node_types {
            Some(p) => Some(NodeTypeTable::parse(Cursor::new(read(p)?)).map_err(to_py)?),
            None => None,
        };
        let options = LoadOptions { schema: EdgeSchema::parse(schema).map_err(to_py)?, directed };
        let inner = tempsketch::load_edge_list(Cursor::new(read(&path)?), &options, types.as_ref()).map_err(to_py)?;
        Ok(Graph { inner })
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn is_temporal(&self) -> bool {
        self.inner.is_temporal()
    }

    #[getter]
    fn is_directed(&self) -> bool {
        self.inner.is_directed()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn degree(&self, label: &str) -> PyResult<u32> {
        let u = self.inner.require_node(label).map_err(to_py)?;
        Ok(self.inner.degree_profile(u).map_err(to_py)?.total)
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={}, temporal={})", self.num_nodes(), self.num_edges(), self.is_temporal())
    }
}

/// One binary sketch per node.
#[pyclass(module = "tempsketch_py", frozen)]
struct Sketches {
    labels: Vec<String>,
    inner: SketchMatrix,
}

impl Sketches {
    fn index(&self, label: &str) -> PyResult<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| PyValueError::new_err(format!("unknown node '{label}'")))
    }
}

#[pymethods]
impl Sketches {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (labels, inner) = read_sketches(&path).map_err(to_py)?;
        let labels = labels.unwrap_or_else(|| (0..inner.num_rows()).map(|i| i.to_string()).collect());
        Ok(Sketches { labels, inner })
    }

    #[pyo3(signature = (path, format="sparse"))]
    fn save(&self, path: PathBuf, format: &str) -> PyResult<()> {
        let format: SketchFormat = format.parse().map_err(to_py)?;
        write_sketches(&self.inner, &self.labels, &path, format).map_err(to_py)
    }

    #[getter]
    fn num_rows(&self) -> usize {
        self.inner.num_rows()
    }

    #[getter]
    fn num_bits(&self) -> usize {
        self.inner.num_bits()
    }

    fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    fn row(&self, label: &str) -> PyResult<Vec<bool>> {
        Ok(self.inner.row(self.index(label)?).to_bools())
    }

    /// Fraction of agreeing bits.
    fn similarity(&self, a: &str, b: &str) -> PyResult<f64> {
        let (a, b) = (self.inner.row(self.index(a)?), self.inner.row(self.index(b)?));
        estimate_similarity(&a, &b).map_err(to_py)
    }

    /// Packed rows, `ceil(K / 8)` bytes each.
    fn to_bytes(&self) -> Vec<u8> {
        self.inner.payload().to_vec()
    }

    /// Unordered candidate pairs sharing a bucket in at least one band.
    #[pyo3(signature = (band_bits=16, seed=0))]
    fn candidate_pairs(&self, band_bits: usize, seed: u64) -> PyResult<Vec<(String, String)>> {
        let table = bucket_sketches(&self.inner, band_bits, seed).map_err(to_py)?;
        Ok(table
            .candidate_pairs()
            .into_iter()
            .map(|(u, v)| (self.labels[u as usize].clone(), self.labels[v as usize].clone()))
            .collect())
    }

    fn __len__(&self) -> usize {
        self.inner.num_rows()
    }

    fn __repr__(&self) -> String {
        format!("Sketches(rows={}, bits={})", self.inner.num_rows(), self.inner.num_bits())
    }
}

fn attributes_for(g: &TemporalGraph, attributes: Option<HashMap<String, Vec<f64>>>, fill: f64) -> PyResult<Option<Attributes>> {
    let Some(map) = attributes else { return Ok(None) };
    let mut values = HashMap::new();
    for (label, v) in map {
        values.insert(g.require_node(&label).map_err(to_py)?, v);
    }
    Ok(Some(Attributes { values, fill }))
}

/// Embeds every node of `graph`.
#[pyfunction]
#[pyo3(signature = (graph, walks=10, walk_length=20, max_dt=3, dim=128, bins=5, policy=None, seed=0, attributes=None, attribute_fill=0.0))]
#[allow(clippy::too_many_arguments)]
fn embed(
    py: Python<'_>,
    graph: &Graph,
    walks: usize,
    walk_length: usize,
    max_dt: usize,
    dim: usize,
    bins: usize,
    policy: Option<&str>,
    seed: u64,
    attributes: Option<HashMap<String, Vec<f64>>>,
    attribute_fill: f64,
) -> PyResult<Sketches> {
    let params = EmbedParams { walks_per_edge: walks, walk_length, max_dt, dim, bins, policy: parse_policy(policy)?, seed };
    let attrs = attributes_for(&graph.inner, attributes, attribute_fill)?;
    let e = py.detach(|| tempsketch::embed(&graph.inner, attrs.as_ref(), &params)).map_err(to_py)?;
    Ok(Sketches { labels: graph.inner.labels().to_vec(), inner: e.sketches })
}

/// SimHash of `h` against `bits` random {-1, +1} planes drawn from `seed`.
#[pyfunction]
#[pyo3(signature = (h, bits, seed=0))]
fn simhash(h: Vec<f64>, bits: usize, seed: u64) -> PyResult<Vec<bool>> {
    let planes = generate_hyperplanes(h.len(), bits, seed).map_err(to_py)?;
    Ok(tempsketch::simhash(&h, &planes).map_err(to_py)?.to_bools())
}

/// Next-step distribution from `node`, reached at time `t_prev`, as `(neighbor, timestamp, probability)`.
#[pyfunction]
#[pyo3(signature = (graph, node, t_prev=None, policy="short"))]
fn transition_distribution(
    graph: &Graph,
    node: &str,
    t_prev: Option<i64>,
    policy: &str,
) -> PyResult<Vec<(String, Option<i64>, f64)>> {
    let g = &graph.inner;
    let mode: WalkMode = policy.parse().map_err(to_py)?;
    let policy = WalkPolicy::for_graph(g, mode).map_err(to_py)?;
    let u = g.require_node(node).map_err(to_py)?;
    let dist = transitions(g, u, t_prev, &policy).map_err(to_py)?;
    Ok(dist.into_iter().map(|(e, p)| (g.label(e.neighbor).to_string(), e.timestamp, p)).collect())
}

/// Perturbed copy of `graph` and its `(original, replica)` label pairs.
#[pyfunction]
#[pyo3(signature = (graph, fraction=0.05, p1=0.6, p2=0.3, seed=0))]
fn inject_replicas(graph: &Graph, fraction: f64, p1: f64, p2: f64, seed: u64) -> PyResult<(Graph, Vec<(String, String)>)> {
    let params = ReplicaParams { fraction, p1, p2, seed };
    let (g, truth) = tempsketch::inject_replicas(&graph.inner, &params).map_err(to_py)?;
    let pairs = truth.pairs.iter().map(|&(u, r)| (g.label(u).to_string(), g.label(r).to_string())).collect();
    Ok((Graph { inner: g }, pairs))
}

fn report_dict<'py>(py: Python<'py>, r: &MetricReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("auc", r.auc)?;
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("f1", r.f1)?;
    d.set_item("precision", r.precision())?;
    d.set_item("recall", r.recall())?;
    d.set_item("positives", r.positives)?;
    d.set_item("negatives", r.negatives)?;
    Ok(d)
}

/// AUC (None for a single class), accuracy and F1 at `threshold`.
#[pyfunction]
#[pyo3(signature = (scores, labels, threshold=0.5))]
fn compute_metrics<'py>(py: Python<'py>, scores: Vec<f64>, labels: Vec<bool>, threshold: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = tempsketch::compute_metrics(&scores, &labels, threshold).map_err(to_py)?;
    report_dict(py, &r)
}

/// Replica benchmark with the logistic pair classifier; returns test metrics.
#[pyfunction]
#[pyo3(signature = (graph, seed=0, fraction=0.05, walks=10, dim=128, max_dt=3, policy=None, shuffle_labels=false))]
#[allow(clippy::too_many_arguments)]
fn evaluate<'py>(
    py: Python<'py>,
    graph: &Graph,
    seed: u64,
    fraction: f64,
    walks: usize,
    dim: usize,
    max_dt: usize,
    policy: Option<&str>,
    shuffle_labels: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut config = tempsketch::RunConfig { seed, fraction, walks, dim, max_dt, shuffle_labels, ..Default::default() };
    config.policy = parse_policy(policy)?;
    config.band_bits = config.band_bits.min(dim / max_dt.max(1)).max(1);
    config.validate().map_err(to_py)?;
    let params = EvalParams::from(&config);
    let out = py.detach(|| tempsketch::evaluate_supervised(&graph.inner, None, &params)).map_err(to_py)?;
    report_dict(py, &out.run.report)
}

#[pymodule]
fn tempsketch_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Sketches>()?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(simhash, m)?)?;
    m.add_function(wrap_pyfunction!(transition_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(inject_replicas, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
