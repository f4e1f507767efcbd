//! Sparse salient-term vectors.
//!
//! Every salient term (a unigram or bigram) is one dimension of an unbounded
//! space. Items carry a [`ConceptVector`] of salience weights; groups of items
//! are represented by summing their vectors, and similarity is the cosine of
//! two vectors over their shared terms.

mod tfidf;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{JourneyError, Result};

pub use tfidf::{tfidf_extract, tokenize};

/// Entries with absolute weight below this are dropped on canonicalization.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Sparse map from salient term to non-negative salience weight.
///
/// Stored in canonical form: every weight is finite and at least
/// [`WEIGHT_FLOOR`], and iteration is sorted by term.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct ConceptVector {
    entries: BTreeMap<String, f64>,
}

fn check_weight(term: &str, weight: f64) -> Result<()> {
    if term.is_empty() {
        return Err(JourneyError::InvalidVector("empty term".into()));
    }
    if !weight.is_finite() || weight < 0.0 {
        return Err(JourneyError::InvalidVector(format!(
            "weight for {term:?} must be finite and non-negative, got {weight}"
        )));
    }
    Ok(())
}

impl ConceptVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(term, weight)` pairs. Repeated terms are summed.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (term, weight) in pairs {
            let term = term.into();
            check_weight(&term, weight)?;
            *entries.entry(term).or_insert(0.0) += weight;
        }
        let mut v = Self { entries };
        v.canonicalize();
        Ok(v)
    }

    fn canonicalize(&mut self) {
        self.entries.retain(|_, w| *w >= WEIGHT_FLOOR);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: &str) -> f64 {
        self.entries.get(term).copied().unwrap_or(0.0)
    }

    /// Iterates `(term, weight)` in term order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.entries.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    pub fn max_weight(&self) -> f64 {
        self.entries.values().copied().fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Dot product, iterating the smaller vector.
    pub fn dot(&self, other: &ConceptVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(t, w)| large.entries.get(t).map(|v| w * v))
            .sum()
    }

    /// Cosine similarity in `[0, 1]`; zero when either side is empty.
    pub fn cosine(&self, other: &ConceptVector) -> f64 {
        cosine_with_norms(self, self.norm(), other, other.norm())
    }

    /// Adds `other` into `self` term by term.
    pub fn accumulate(&mut self, other: &ConceptVector) {
        for (t, w) in &other.entries {
            *self.entries.entry(t.clone()).or_insert(0.0) += *w;
        }
        self.canonicalize();
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<ConceptVector> {
        ConceptVector::from_pairs(self.iter().map(|(t, w)| (t.to_string(), w * factor)))
    }

    /// The `k` heaviest entries, heaviest first, ties broken by term.
    pub fn top_terms(&self, k: usize) -> Result<Vec<(String, f64)>> {
        if k == 0 {
            return Err(JourneyError::arg("top_terms requires k >= 1"));
        }
        let mut all: Vec<(&String, f64)> = self.entries.iter().map(|(t, w)| (t, *w)).collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(all
            .into_iter()
            .take(k)
            .map(|(t, w)| (t.clone(), w))
            .collect())
    }
}

pub(crate) fn cosine_with_norms(a: &ConceptVector, norm_a: f64, b: &ConceptVector, norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (norm_a * norm_b)).clamp(0.0, 1.0)
}

impl TryFrom<BTreeMap<String, f64>> for ConceptVector {
    type Error = JourneyError;

    fn try_from(map: BTreeMap<String, f64>) -> Result<Self> {
        ConceptVector::from_pairs(map)
    }
}

impl From<ConceptVector> for BTreeMap<String, f64> {
    fn from(v: ConceptVector) -> Self {
        v.entries
    }
}

/// Cosine similarity of two concept vectors.
pub fn cosine(a: &ConceptVector, b: &ConceptVector) -> f64 {
    a.cosine(b)
}

/// Element-wise sum of `vectors`; empty input gives the empty vector.
pub fn aggregate<'a, I>(vectors: I) -> ConceptVector
where
    I: IntoIterator<Item = &'a ConceptVector>,
{
    let mut out = ConceptVector::new();
    for v in vectors {
        out.accumulate(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(pairs: &[(&str, f64)]) -> ConceptVector {
        ConceptVector::from_pairs(pairs.iter().map(|(t, w)| (*t, *w))).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&cv(&[("surf", 1.0)]), &cv(&[("surf", 1.0)])), 1.0);
        assert_eq!(cosine(&cv(&[("surf", 1.0)]), &cv(&[("chess", 1.0)])), 0.0);
        let c = cosine(&cv(&[("a", 1.0), ("b", 1.0)]), &cv(&[("a", 1.0)]));
        assert!((c - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn cosine_of_empty_is_zero() {
        assert_eq!(cosine(&ConceptVector::new(), &cv(&[("a", 1.0)])), 0.0);
        assert_eq!(cosine(&ConceptVector::new(), &ConceptVector::new()), 0.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(ConceptVector::from_pairs([("a", f64::NAN)]).is_err());
        assert!(ConceptVector::from_pairs([("a", -0.1)]).is_err());
        assert!(ConceptVector::from_pairs([("a", f64::INFINITY)]).is_err());
        assert!(ConceptVector::from_pairs([("", 0.5)]).is_err());
    }

    #[test]
    fn drops_negligible_entries() {
        let v = cv(&[("a", 0.0), ("b", 1e-13), ("c", 0.5)]);
        assert_eq!(v.len(), 1);
        assert_eq!(v.get("c"), 0.5);
    }

    #[test]
    fn aggregate_examples() {
        let sum = aggregate(&[cv(&[("a", 0.5)]), cv(&[("a", 0.3), ("b", 0.6)])]);
        assert!((sum.get("a") - 0.8).abs() < 1e-12);
        assert!((sum.get("b") - 0.6).abs() < 1e-12);
        assert_eq!(sum.len(), 2);
        assert!(aggregate(&[]).is_empty());
        assert_eq!(aggregate(&[cv(&[("a", 1.0)])]), cv(&[("a", 1.0)]));
    }

    #[test]
    fn top_terms_examples() {
        let v = cv(&[("a", 0.2), ("b", 0.9), ("c", 0.9)]);
        assert_eq!(
            v.top_terms(2).unwrap(),
            vec![("b".to_string(), 0.9), ("c".to_string(), 0.9)]
        );
        assert!(ConceptVector::new().top_terms(3).unwrap().is_empty());
        assert_eq!(cv(&[("x", 0.5)]).top_terms(5).unwrap(), vec![("x".to_string(), 0.5)]);
        assert!(matches!(v.top_terms(0), Err(JourneyError::InvalidArgument(_))));
    }

    #[test]
    fn serde_rejects_negative() {
        let ok: ConceptVector = serde_json::from_str(r#"{"surf":0.5}"#).unwrap();
        assert_eq!(ok.get("surf"), 0.5);
        assert!(serde_json::from_str::<ConceptVector>(r#"{"surf":-1.0}"#).is_err());
    }
}
