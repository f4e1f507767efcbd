//! Items, item corpora and per-user histories.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::concept::ConceptVector;
use crate::error::{JourneyError, Result};

/// Slack allowed above 1.0 for item-level salience weights.
const ITEM_WEIGHT_SLACK: f64 = 1e-9;

/// One interaction unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "ts", default)]
    pub timestamp: i64,
    #[serde(default)]
    pub concepts: ConceptVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<f64>>,
}

impl Item {
    pub fn new(id: impl Into<String>, title: impl Into<String>, concepts: ConceptVector) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            timestamp: 0,
            concepts,
            dense: None,
        }
    }

    pub fn with_timestamp(mut self, ts: i64) -> Self {
        self.timestamp = ts;
        self
    }

    pub fn with_dense(mut self, dense: Vec<f64>) -> Self {
        self.dense = Some(dense);
        self
    }

    /// Checks item-level invariants: non-empty id, salience weights in
    /// `[0, 1]` and finite dense coordinates.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(JourneyError::input("item id must not be empty"));
        }
        if let Some((term, w)) = self
            .concepts
            .iter()
            .find(|(_, w)| *w > 1.0 + ITEM_WEIGHT_SLACK)
        {
            return Err(JourneyError::InvalidVector(format!(
                "item {}: salience of {term:?} is {w}, above 1",
                self.id
            )));
        }
        if let Some(dense) = &self.dense {
            if dense.iter().any(|x| !x.is_finite()) {
                return Err(JourneyError::input(format!(
                    "item {}: dense embedding has non-finite values",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Time-ordered items of one user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UserHistory {
    pub user_id: String,
    pub items: Vec<Item>,
}

impl UserHistory {
    pub fn new(user_id: impl Into<String>, items: Vec<Item>) -> Self {
        Self {
            user_id: user_id.into(),
            items,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.items.iter().map(|i| i.id.as_str())
    }
}

/// All items known to a run, indexed by id.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    items: Vec<Item>,
    index: HashMap<String, usize>,
    dense_dim: Option<usize>,
}

impl Corpus {
    /// Validates ids are unique and dense embeddings share one length.
    pub fn new(items: Vec<Item>) -> Result<Self> {
        let mut index = HashMap::with_capacity(items.len());
        let mut dense_dim = None;
        for (pos, item) in items.iter().enumerate() {
            item.validate()?;
            if index.insert(item.id.clone(), pos).is_some() {
                return Err(JourneyError::input(format!("duplicate item id {:?}", item.id)));
            }
            if let Some(d) = &item.dense {
                match dense_dim {
                    None => dense_dim = Some(d.len()),
                    Some(n) if n != d.len() => {
                        return Err(JourneyError::input(format!(
                            "item {}: dense length {} differs from corpus length {n}",
                            item.id,
                            d.len()
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(Self {
            items,
            index,
            dense_dim,
        })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Item> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    /// Length of the dense embeddings, if any item carries one.
    pub fn dense_dim(&self) -> Option<usize> {
        self.dense_dim
    }

    /// True when every item carries a dense embedding.
    pub fn fully_embedded(&self) -> bool {
        self.items.iter().all(|i| i.dense.is_some())
    }

    /// Resolves ids into a history, keeping the given order.
    pub fn history<S: AsRef<str>>(&self, user_id: &str, item_ids: &[S]) -> Result<UserHistory> {
        let items = item_ids
            .iter()
            .map(|id| {
                let id = id.as_ref();
                self.get(id)
                    .cloned()
                    .ok_or_else(|| JourneyError::input(format!("unknown item id {id:?} for user {user_id:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UserHistory::new(user_id, items))
    }
}
