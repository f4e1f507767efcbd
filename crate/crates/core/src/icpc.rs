//! Per-user online clustering in concept space.
//!
//! Items of one history are visited in order. Each item joins the journey
//! whose representation is most similar to it when that similarity reaches
//! the threshold, and otherwise opens a new journey. The chosen journey's
//! representation then absorbs the item's concept vector. Journeys that end
//! up too small are pruned.

use serde::{Deserialize, Serialize};

use crate::concept::{cosine_with_norms, ConceptVector};
use crate::error::{JourneyError, Result};
use crate::item::{Item, UserHistory};

/// Default similarity threshold.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Similarities closer than this are treated as equal, so ties that are
/// exact in real arithmetic still go to the oldest journey and still meet a
/// threshold they equal.
pub const SIM_TOLERANCE: f64 = 1e-12;

/// Journeys smaller than this are always pruned, whatever the configured
/// minimum: single items are not journeys.
pub const PRUNE_FLOOR: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcpcConfig {
    /// Similarity threshold in `[0, 1]`.
    pub epsilon: f64,
    /// Minimum journey size kept after clustering.
    pub min_cluster_size: usize,
}

impl Default for IcpcConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            min_cluster_size: 1,
        }
    }
}

impl IcpcConfig {
    pub fn new(epsilon: f64, min_cluster_size: usize) -> Result<Self> {
        let cfg = Self {
            epsilon,
            min_cluster_size,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(JourneyError::arg(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if self.min_cluster_size == 0 {
            return Err(JourneyError::arg("min_cluster_size must be at least 1"));
        }
        Ok(())
    }

    /// Size below which a journey is pruned.
    pub fn prune_threshold(&self) -> usize {
        self.min_cluster_size.max(PRUNE_FLOOR)
    }
}

/// One extracted journey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JourneyCluster {
    pub creation_index: usize,
    pub members: Vec<String>,
    pub representation: ConceptVector,
}

impl JourneyCluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Journeys surviving pruning plus the ids of pruned items.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub user_id: String,
    pub journeys: Vec<JourneyCluster>,
    pub pruned_items: Vec<String>,
}

impl ExtractionResult {
    pub fn empty(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            ..Self::default()
        }
    }

    pub fn item_count(&self) -> usize {
        self.journeys.iter().map(JourneyCluster::len).sum::<usize>() + self.pruned_items.len()
    }

    /// True when journeys and pruned items together hold every id of
    /// `history` exactly once.
    pub fn is_partition_of(&self, history: &UserHistory) -> bool {
        let mut got: Vec<&str> = self
            .journeys
            .iter()
            .flat_map(|j| j.members.iter().map(String::as_str))
            .chain(self.pruned_items.iter().map(String::as_str))
            .collect();
        let mut want: Vec<&str> = history.item_ids().collect();
        got.sort_unstable();
        want.sort_unstable();
        got == want
    }
}

/// Splits clusters into survivors and pruned ids. Pruned ids come out in
/// history order according to `position`.
pub(crate) fn prune_clusters(
    user_id: &str,
    clusters: Vec<JourneyCluster>,
    threshold: usize,
    position: impl Fn(&str) -> usize,
) -> ExtractionResult {
    let (journeys, small): (Vec<_>, Vec<_>) = clusters.into_iter().partition(|c| c.len() >= threshold);
    let mut pruned_items: Vec<String> = small.into_iter().flat_map(|c| c.members).collect();
    pruned_items.sort_by_key(|id| position(id));
    ExtractionResult {
        user_id: user_id.to_string(),
        journeys,
        pruned_items,
    }
}

/// Similarity of an item to a journey: cosine against its representation.
pub fn item_journey_sim(item: &Item, journey: &JourneyCluster) -> f64 {
    item.concepts.cosine(&journey.representation)
}

/// What happened to one pushed item.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// Position of the journey (equal to its creation index) the item went to.
    pub journey: usize,
    /// Similarity to that journey before the item was added; `None` when the
    /// item opened a new journey.
    pub similarity: Option<f64>,
}

/// Incremental state of one clustering run.
#[derive(Debug, Clone)]
pub struct OnlineClusterer {
    epsilon: f64,
    journeys: Vec<JourneyCluster>,
    norms: Vec<f64>,
}

impl OnlineClusterer {
    pub fn new(cfg: &IcpcConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::with_threshold(cfg.epsilon))
    }

    /// Builds a clusterer with any finite threshold, including values
    /// outside `[0, 1]`. Used to probe boundary behaviour.
    pub fn with_threshold(epsilon: f64) -> Self {
        Self {
            epsilon,
            journeys: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub fn journeys(&self) -> &[JourneyCluster] {
        &self.journeys
    }

    /// Most similar existing journey; ties go to the oldest one.
    fn best_match(&self, item: &Item, item_norm: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (idx, (journey, &norm)) in self.journeys.iter().zip(&self.norms).enumerate() {
            let sim = cosine_with_norms(&item.concepts, item_norm, &journey.representation, norm);
            if best.is_none_or(|(_, s)| sim > s + SIM_TOLERANCE) {
                best = Some((idx, sim));
            }
        }
        best
    }

    pub fn push(&mut self, item: &Item) -> Step {
        let item_norm = item.concepts.norm();
        // Items without concepts carry no evidence and always stand alone.
        let chosen = if item.concepts.is_empty() {
            None
        } else {
            self.best_match(item, item_norm)
                .filter(|&(_, sim)| sim >= self.epsilon - SIM_TOLERANCE)
        };
        match chosen {
            Some((idx, sim)) => {
                let journey = &mut self.journeys[idx];
                journey.members.push(item.id.clone());
                journey.representation.accumulate(&item.concepts);
                self.norms[idx] = journey.representation.norm();
                Step {
                    journey: idx,
                    similarity: Some(sim),
                }
            }
            None => {
                let idx = self.journeys.len();
                self.journeys.push(JourneyCluster {
                    creation_index: idx,
                    members: vec![item.id.clone()],
                    representation: item.concepts.clone(),
                });
                self.norms.push(item_norm);
                Step {
                    journey: idx,
                    similarity: None,
                }
            }
        }
    }

    /// Prunes journeys below `threshold` members and returns the result.
    pub fn finish(self, history: &UserHistory, threshold: usize) -> ExtractionResult {
        let position: std::collections::HashMap<&str, usize> =
            history.item_ids().enumerate().map(|(i, id)| (id, i)).collect();
        prune_clusters(&history.user_id, self.journeys, threshold, |id| {
            position.get(id).copied().unwrap_or(usize::MAX)
        })
    }
}

/// Clusters one user's history into journeys.
pub fn extract_journeys(history: &UserHistory, cfg: &IcpcConfig) -> Result<ExtractionResult> {
    let mut clusterer = OnlineClusterer::new(cfg)?;
    for item in &history.items {
        clusterer.push(item);
    }
    Ok(clusterer.finish(history, cfg.prune_threshold()))
}
