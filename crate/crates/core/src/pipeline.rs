//! End-to-end wiring of extractors, training and evaluation.

use serde::{Deserialize, Serialize};

use crate::baselines::{
    build_cooccurrence, cooc_extract, factorize, kmeans, median_pair_distance, GlobalAssignment, MultimodalModel,
    DEFAULT_CLUSTERS, DEFAULT_DIM, DEFAULT_FACTOR_ITERS, DEFAULT_KMEANS_ITERS, DEFAULT_MERGE_CONFLICTS,
};
use crate::error::{JourneyError, Result};
use crate::eval::{evaluate, mix_playlists, EvalReport, GoldenInstance, Playlist};
use crate::icpc::{extract_journeys, ExtractionResult, IcpcConfig};
use crate::item::{Corpus, UserHistory};

/// Pairs sampled for the default multimodal radius.
pub const DISTANCE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Icpc,
    Cooc,
    Multimodal,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Icpc => "icpc",
            Method::Cooc => "cooc",
            Method::Multimodal => "multimodal",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = JourneyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "icpc" => Ok(Method::Icpc),
            "cooc" => Ok(Method::Cooc),
            "multimodal" => Ok(Method::Multimodal),
            other => Err(JourneyError::arg(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoocParams {
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub iters: usize,
    pub kmeans_iters: usize,
    pub seed: u64,
}

impl Default for CoocParams {
    fn default() -> Self {
        Self {
            dim: DEFAULT_DIM,
            k: DEFAULT_CLUSTERS,
            iters: DEFAULT_FACTOR_ITERS,
            kmeans_iters: DEFAULT_KMEANS_ITERS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultimodalParams {
    /// Micro-cluster radius; `None` uses the median sampled pair distance.
    pub eps_dist: Option<f64>,
    pub merge_conflicts: usize,
    pub seed: u64,
}

impl Default for MultimodalParams {
    fn default() -> Self {
        Self {
            eps_dist: None,
            merge_conflicts: DEFAULT_MERGE_CONFLICTS,
            seed: 0,
        }
    }
}

/// Co-occurrence → factorization → k-means over training histories.
pub fn train_cooc(histories: &[UserHistory], params: &CoocParams) -> Result<GlobalAssignment> {
    let m = build_cooccurrence(histories);
    if m.is_empty() {
        return Err(JourneyError::input("co-occurrence training needs at least one item"));
    }
    let f = factorize(&m, params.dim, params.iters, params.seed)?;
    kmeans(&f.embeddings, params.k, params.kmeans_iters, params.seed)
}

/// Radius actually used for `params` on `corpus`.
pub fn resolve_eps_dist(corpus: &Corpus, params: &MultimodalParams) -> Result<f64> {
    match params.eps_dist {
        Some(e) => Ok(e),
        None => median_pair_distance(corpus.items(), DISTANCE_SAMPLES, params.seed),
    }
}

/// Fits the global micro/macro hierarchy over the whole corpus in order.
pub fn fit_multimodal(corpus: &Corpus, params: &MultimodalParams) -> Result<MultimodalModel> {
    if !corpus.fully_embedded() {
        return Err(JourneyError::input(
            "multimodal method needs a dense embedding on every item",
        ));
    }
    let eps = resolve_eps_dist(corpus, params)?;
    MultimodalModel::fit(corpus.items(), eps, params.merge_conflicts)
}

/// A ready-to-run journey extractor.
#[derive(Debug, Clone)]
pub enum Extractor {
    Icpc(IcpcConfig),
    Cooc {
        assignment: GlobalAssignment,
        min_cluster_size: usize,
    },
    Multimodal {
        model: MultimodalModel,
        min_cluster_size: usize,
    },
}

impl Extractor {
    pub fn method(&self) -> Method {
        match self {
            Extractor::Icpc(_) => Method::Icpc,
            Extractor::Cooc { .. } => Method::Cooc,
            Extractor::Multimodal { .. } => Method::Multimodal,
        }
    }

    pub fn extract(&self, history: &UserHistory) -> Result<ExtractionResult> {
        match self {
            Extractor::Icpc(cfg) => extract_journeys(history, cfg),
            Extractor::Cooc {
                assignment,
                min_cluster_size,
            } => {
                let out = cooc_extract(history, assignment, *min_cluster_size);
                if out.cold_items > 0 {
                    log::warn!(
                        "{}: {} item(s) missing from the co-occurrence model",
                        history.user_id,
                        out.cold_items
                    );
                }
                Ok(out.result)
            }
            Extractor::Multimodal {
                model,
                min_cluster_size,
            } => Ok(model.extract(history, *min_cluster_size)),
        }
    }
}

/// Mixes playlists into synthetic users, extracts, and scores.
pub fn run_e2(playlists: &[Playlist], corpus: &Corpus, extractor: &Extractor, seed: u64) -> Result<(Vec<GoldenInstance>, EvalReport)> {
    let instances = mix_playlists(playlists, corpus, 2, seed)?;
    let results = instances
        .iter()
        .map(|inst| extractor.extract(&inst.mixed_history))
        .collect::<Result<Vec<_>>>()?;
    let report = evaluate(extractor.method().as_str(), &instances, &results)?;
    Ok((instances, report))
}
