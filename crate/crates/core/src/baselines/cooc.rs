use std::collections::{BTreeMap, HashMap};

use crate::concept::aggregate;
use crate::icpc::{prune_clusters, ExtractionResult, JourneyCluster, PRUNE_FLOOR};
use crate::item::UserHistory;

use super::GlobalAssignment;

/// Symmetric count matrix of consecutive interactions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoocMatrix {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<BTreeMap<usize, u64>>,
}

impl CoocMatrix {
    fn slot(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        self.rows.push(BTreeMap::new());
        i
    }

    /// Registers one interaction sequence.
    pub fn add_sequence<S: AsRef<str>>(&mut self, ids: &[S]) {
        let slots: Vec<usize> = ids.iter().map(|id| self.slot(id.as_ref())).collect();
        for pair in slots.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a != b {
                *self.rows[a].entry(b).or_insert(0) += 1;
                *self.rows[b].entry(a).or_insert(0) += 1;
            }
        }
    }

    /// Item ids in row order (first appearance).
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn count(&self, a: &str, b: &str) -> u64 {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.rows[i].get(&j).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Non-zero entries of row `i`, ascending by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rows[i].iter().map(|(&j, &c)| (j, c))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.iter()
                .all(|(&j, &c)| i != j && self.rows[j].get(&i) == Some(&c))
        })
    }
}

/// Counts consecutive distinct pairs across all histories.
pub fn build_cooccurrence(histories: &[UserHistory]) -> CoocMatrix {
    let mut m = CoocMatrix::default();
    for h in histories {
        let ids: Vec<&str> = h.item_ids().collect();
        m.add_sequence(&ids);
    }
    m
}

/// Co-occurrence journeys of one user plus the number of items the global
/// assignment did not know.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocExtraction {
    pub result: ExtractionResult,
    pub cold_items: usize,
}

/// Groups a user's items by global cluster. Unknown items become singleton
/// groups.
pub fn cooc_extract(history: &UserHistory, assignment: &GlobalAssignment, min_cluster_size: usize) -> CoocExtraction {
    enum Key {
        Cluster(usize),
        Cold,
    }
    let mut groups: Vec<JourneyCluster> = Vec::new();
    let mut by_cluster: HashMap<usize, usize> = HashMap::new();
    let mut cold_items = 0;
    for item in &history.items {
        let key = match assignment.cluster_of(&item.id) {
            Some(c) => Key::Cluster(c),
            None => Key::Cold,
        };
        let slot = match key {
            Key::Cluster(c) => by_cluster.get(&c).copied(),
            Key::Cold => {
                cold_items += 1;
                None
            }
        };
        match slot {
            Some(g) => groups[g].members.push(item.id.clone()),
            None => {
                let g = groups.len();
                if let Key::Cluster(c) = key {
                    by_cluster.insert(c, g);
                }
                groups.push(JourneyCluster {
                    creation_index: g,
                    members: vec![item.id.clone()],
                    representation: Default::default(),
                });
            }
        }
    }
    let position: HashMap<&str, usize> = history.item_ids().enumerate().map(|(i, id)| (id, i)).collect();
    let concepts: HashMap<&str, _> = history.items.iter().map(|i| (i.id.as_str(), &i.concepts)).collect();
    for g in &mut groups {
        g.representation = aggregate(g.members.iter().map(|m| concepts[m.as_str()]));
    }
    let result = prune_clusters(
        &history.user_id,
        groups,
        min_cluster_size.max(PRUNE_FLOOR),
        |id| position[id],
    );
    CoocExtraction { result, cold_items }
}
