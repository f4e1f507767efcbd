//! Online two-level clustering over dense content embeddings.
//!
//! Items stream in once. Each item joins the nearest micro-cluster whose
//! centroid lies within `eps_dist`, or starts a new one. Whenever an item
//! falls within range of several micro-clusters, a conflict is counted for
//! each pair (chosen micro, other micro); after `merge_conflicts` conflicts
//! the two micro-clusters' macro-clusters are merged. Macro-clusters act as
//! journeys.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concept::aggregate;
use crate::error::{JourneyError, Result};
use crate::icpc::{prune_clusters, ExtractionResult, JourneyCluster, PRUNE_FLOOR};
use crate::item::{Item, UserHistory};

pub const DEFAULT_MERGE_CONFLICTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MicroCluster {
    pub centroid: Vec<f64>,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroCluster {
    pub micros: Vec<usize>,
}

#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn push(&mut self) {
        let n = self.parent.len();
        self.parent.push(n);
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins two sets; the smaller root index survives.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Global micro/macro hierarchy fitted over a stream of items.
#[derive(Debug, Clone)]
pub struct MultimodalModel {
    eps_dist: f64,
    merge_conflicts: usize,
    dim: Option<usize>,
    micros: Vec<MicroCluster>,
    sets: UnionFind,
    conflicts: HashMap<(usize, usize), usize>,
    item_micro: HashMap<String, usize>,
}

impl MultimodalModel {
    pub fn new(eps_dist: f64, merge_conflicts: usize) -> Result<Self> {
        if eps_dist.is_nan() || eps_dist <= 0.0 {
            return Err(JourneyError::arg(format!("eps_dist must be positive, got {eps_dist}")));
        }
        if merge_conflicts == 0 {
            return Err(JourneyError::arg("merge_conflicts must be at least 1"));
        }
        Ok(Self {
            eps_dist,
            merge_conflicts,
            dim: None,
            micros: Vec::new(),
            sets: UnionFind { parent: Vec::new() },
            conflicts: HashMap::new(),
            item_micro: HashMap::new(),
        })
    }

    /// Fits a model over `items` in the given order.
    pub fn fit<'a, I>(items: I, eps_dist: f64, merge_conflicts: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Item>,
    {
        let mut model = Self::new(eps_dist, merge_conflicts)?;
        for item in items {
            model.insert(item)?;
        }
        Ok(model)
    }

    /// Adds one item. Re-inserting a known id is a no-op.
    pub fn insert(&mut self, item: &Item) -> Result<()> {
        let dense = item
            .dense
            .as_deref()
            .ok_or_else(|| JourneyError::input(format!("item {} has no dense embedding", item.id)))?;
        match self.dim {
            None => self.dim = Some(dense.len()),
            Some(d) if d != dense.len() => {
                return Err(JourneyError::input(format!(
                    "item {}: dense length {} differs from {d}",
                    item.id,
                    dense.len()
                )))
            }
            _ => {}
        }
        if self.item_micro.contains_key(&item.id) {
            return Ok(());
        }

        let in_range: Vec<(usize, f64)> = self
            .micros
            .iter()
            .enumerate()
            .map(|(m, micro)| (m, distance(dense, &micro.centroid)))
            .filter(|&(_, d)| d <= self.eps_dist)
            .collect();
        let nearest = in_range
            .iter()
            .copied()
            .fold(None::<(usize, f64)>, |best, (m, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((m, d)),
            });

        let target = match nearest {
            Some((m, _)) => {
                for &(other, _) in in_range.iter().filter(|(o, _)| *o != m) {
                    let key = (m.min(other), m.max(other));
                    let count = self.conflicts.entry(key).or_insert(0);
                    *count += 1;
                    if *count == self.merge_conflicts {
                        self.sets.union(m, other);
                    }
                }
                let micro = &mut self.micros[m];
                micro.members.push(item.id.clone());
                let n = micro.members.len() as f64;
                for (c, x) in micro.centroid.iter_mut().zip(dense) {
                    *c += (x - *c) / n;
                }
                m
            }
            None => {
                self.micros.push(MicroCluster {
                    centroid: dense.to_vec(),
                    members: vec![item.id.clone()],
                });
                self.sets.push();
                self.micros.len() - 1
            }
        };
        self.item_micro.insert(item.id.clone(), target);
        Ok(())
    }

    pub fn micros(&self) -> &[MicroCluster] {
        &self.micros
    }

    /// Macro-cluster id (smallest member micro index) of a known item.
    pub fn macro_of(&self, id: &str) -> Option<usize> {
        let m = *self.item_micro.get(id)?;
        let mut sets = self.sets.clone();
        Some(sets.find(m))
    }

    /// Macro-clusters keyed by their root micro index.
    pub fn macros(&self) -> BTreeMap<usize, MacroCluster> {
        let mut sets = self.sets.clone();
        let mut out: BTreeMap<usize, MacroCluster> = BTreeMap::new();
        for m in 0..self.micros.len() {
            out.entry(sets.find(m))
                .or_insert_with(|| MacroCluster { micros: Vec::new() })
                .micros
                .push(m);
        }
        out
    }

    /// Restricts macro-clusters to one user's items. Items the model never
    /// saw become singleton groups.
    pub fn extract(&self, history: &UserHistory, min_cluster_size: usize) -> ExtractionResult {
        let mut sets = self.sets.clone();
        let mut groups: Vec<JourneyCluster> = Vec::new();
        let mut by_macro: HashMap<usize, usize> = HashMap::new();
        for item in &history.items {
            let root = self.item_micro.get(&item.id).map(|&m| sets.find(m));
            match root.and_then(|r| by_macro.get(&r).copied()) {
                Some(g) => groups[g].members.push(item.id.clone()),
                None => {
                    let g = groups.len();
                    if let Some(r) = root {
                        by_macro.insert(r, g);
                    }
                    groups.push(JourneyCluster {
                        creation_index: g,
                        members: vec![item.id.clone()],
                        representation: Default::default(),
                    });
                }
            }
        }
        let concepts: HashMap<&str, _> = history.items.iter().map(|i| (i.id.as_str(), &i.concepts)).collect();
        for g in &mut groups {
            g.representation = aggregate(g.members.iter().map(|m| concepts[m.as_str()]));
        }
        let position: HashMap<&str, usize> = history.item_ids().enumerate().map(|(i, id)| (id, i)).collect();
        prune_clusters(&history.user_id, groups, min_cluster_size.max(PRUNE_FLOOR), |id| position[id])
    }
}

/// Fits the hierarchy on a history's own items and extracts its journeys.
pub fn multimodal_extract(
    history: &UserHistory,
    eps_dist: f64,
    merge_conflicts: usize,
    min_cluster_size: usize,
) -> Result<ExtractionResult> {
    let model = MultimodalModel::fit(&history.items, eps_dist, merge_conflicts)?;
    Ok(model.extract(history, min_cluster_size))
}

/// Median Euclidean distance over `samples` seeded random item pairs.
pub fn median_pair_distance(items: &[Item], samples: usize, seed: u64) -> Result<f64> {
    let dense: Vec<&[f64]> = items
        .iter()
        .map(|i| {
            i.dense
                .as_deref()
                .ok_or_else(|| JourneyError::input(format!("item {} has no dense embedding", i.id)))
        })
        .collect::<Result<_>>()?;
    if dense.len() < 2 || samples == 0 {
        return Err(JourneyError::input("need at least two embedded items and one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d: Vec<f64> = (0..samples)
        .map(|_| {
            let a = rng.random_range(0..dense.len());
            let mut b = rng.random_range(0..dense.len() - 1);
            if b >= a {
                b += 1;
            }
            distance(dense[a], dense[b])
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    Ok(if d.len().is_multiple_of(2) { (d[mid - 1] + d[mid]) / 2.0 } else { d[mid] })
}
