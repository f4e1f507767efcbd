//! Python bindings: concept vectors, journey extraction, synthetic corpora,
//! evaluation metrics, prompt building and BLEU.

use std::collections::BTreeMap;

use journey_core::eval::{self, GoldenJourney};
use journey_core::io::JourneysRecord;
use journey_core::naming::{self, PromptInput, PromptKind, PromptTemplate};
use journey_core::synth::{self, SynthSpec};
use journey_core::{ConceptVector, IcpcConfig, Item, JourneyCluster, JourneyError, UserHistory};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn err(e: JourneyError) -> PyErr {
    match e {
        JourneyError::Io(_) | JourneyError::Backend { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Converts a serializable value into plain Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Sparse non-negative term vector.
#[pyclass(name = "ConceptVector", module = "journeys_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyConceptVector {
    inner: ConceptVector,
}

#[pymethods]
impl PyConceptVector {
    #[new]
    #[pyo3(signature = (weights = None))]
    fn new(weights: Option<BTreeMap<String, f64>>) -> PyResult<Self> {
        let inner = ConceptVector::from_pairs(weights.unwrap_or_default()).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_dict(&self) -> BTreeMap<String, f64> {
        self.inner.iter().map(|(t, w)| (t.to_string(), w)).collect()
    }

    fn get(&self, term: &str) -> f64 {
        self.inner.get(term)
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn cosine(&self, other: &PyConceptVector) -> f64 {
        self.inner.cosine(&other.inner)
    }

    fn top_terms(&self, k: usize) -> PyResult<Vec<(String, f64)>> {
        self.inner.top_terms(k).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &PyConceptVector) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let body = self
            .inner
            .iter()
            .map(|(t, w)| format!("{t:?}: {w}"))
            .collect::<Vec<_>>()
            .join(", ");
        format!("ConceptVector({{{body}}})")
    }
}

#[pyfunction]
fn cosine(a: &PyConceptVector, b: &PyConceptVector) -> f64 {
    journey_core::cosine(&a.inner, &b.inner)
}

#[pyfunction]
fn aggregate(vectors: Vec<PyConceptVector>) -> PyConceptVector {
    PyConceptVector {
        inner: journey_core::aggregate(vectors.iter().map(|v| &v.inner)),
    }
}

/// Clusters one history given as `(id, title, {term: weight})` tuples.
#[pyfunction]
#[pyo3(signature = (user_id, items, epsilon = 0.1, min_cluster_size = 1))]
fn extract_journeys<'py>(
    py: Python<'py>,
    user_id: &str,
    items: Vec<(String, String, BTreeMap<String, f64>)>,
    epsilon: f64,
    min_cluster_size: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let items = items
        .into_iter()
        .map(|(id, title, weights)| {
            let item = Item::new(id, title, ConceptVector::from_pairs(weights)?);
            item.validate()?;
            Ok(item)
        })
        .collect::<Result<Vec<_>, JourneyError>>()
        .map_err(err)?;
    let cfg = IcpcConfig::new(epsilon, min_cluster_size).map_err(err)?;
    let result = journey_core::extract_journeys(&UserHistory::new(user_id, items), &cfg).map_err(err)?;
    to_py(py, &JourneysRecord::from(&result))
}

/// Generates a synthetic corpus; returns `{items, playlists, histories}`.
#[pyfunction]
#[pyo3(signature = (n_users, journeys_per_user, items_per_journey, seed = 0, shared_vocab_fraction = 0.0, noise_terms_per_item = 0))]
fn generate<'py>(
    py: Python<'py>,
    n_users: usize,
    journeys_per_user: usize,
    items_per_journey: usize,
    seed: u64,
    shared_vocab_fraction: f64,
    noise_terms_per_item: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = SynthSpec::new(n_users, journeys_per_user, items_per_journey)
        .with_seed(seed)
        .with_shared(shared_vocab_fraction)
        .with_noise(noise_terms_per_item);
    let corpus = synth::generate(&spec).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("items", to_py(py, &corpus.items)?)?;
    out.set_item("playlists", to_py(py, &corpus.playlists)?)?;
    out.set_item("histories", to_py(py, &corpus.histories)?)?;
    Ok(out.into_any())
}

fn golden_of(golden: &Bound<'_, PyDict>) -> PyResult<Vec<GoldenJourney>> {
    golden
        .iter()
        .map(|(k, v)| {
            Ok(GoldenJourney {
                journey_id: k.extract()?,
                item_ids: v.extract()?,
            })
        })
        .collect()
}

fn clusters_of(clusters: Vec<Vec<String>>) -> Vec<JourneyCluster> {
    clusters
        .into_iter()
        .enumerate()
        .map(|(i, members)| JourneyCluster {
            creation_index: i,
            members,
            representation: ConceptVector::new(),
        })
        .collect()
}

/// Mean best-cluster recall of `{journey_id: [item ids]}` against clusters.
#[pyfunction]
fn recall(golden: &Bound<'_, PyDict>, clusters: Vec<Vec<String>>) -> PyResult<f64> {
    eval::recall(&golden_of(golden)?, &clusters_of(clusters)).map_err(err)
}

#[pyfunction]
fn precision(golden: &Bound<'_, PyDict>, clusters: Vec<Vec<String>>) -> PyResult<f64> {
    Ok(eval::precision(&golden_of(golden)?, &clusters_of(clusters)))
}

#[pyfunction]
fn clusters_per_journey(golden: &Bound<'_, PyDict>, clusters: Vec<Vec<String>>) -> PyResult<f64> {
    Ok(eval::clusters_per_journey(&golden_of(golden)?, &clusters_of(clusters)))
}

/// Renders a naming prompt. `kind` is one of `natural_titles`,
/// `structured_titles`, `structured_keywords`, `structured_titles_keywords`.
#[pyfunction]
#[pyo3(signature = (kind, titles, keywords = Vec::new(), max_items = None))]
fn build_prompt(kind: &str, titles: Vec<String>, keywords: Vec<String>, max_items: Option<usize>) -> PyResult<String> {
    let kind: PromptKind = kind.parse().map_err(err)?;
    let mut template = PromptTemplate::new(kind);
    if let Some(n) = max_items {
        template = template.with_max_items(n);
    }
    naming::build_prompt(&PromptInput { titles, keywords }, &template).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (candidate, reference, max_n = 4))]
fn bleu(candidate: &str, reference: &str, max_n: usize) -> f64 {
    naming::bleu(candidate, reference, max_n)
}

#[pymodule]
pub fn journeys_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConceptVector>()?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(extract_journeys, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(recall, m)?)?;
    m.add_function(wrap_pyfunction!(precision, m)?)?;
    m.add_function(wrap_pyfunction!(clusters_per_journey, m)?)?;
    m.add_function(wrap_pyfunction!(build_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(bleu, m)?)?;
    Ok(())
}
