//! TF-IDF fallback for corpora that arrive without salience scores.

use std::collections::{BTreeMap, HashMap};

use super::ConceptVector;
use crate::error::{JourneyError, Result};

/// Lowercases, splits on runs of non-alphanumeric characters and drops
/// tokens shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_string)
        .collect()
}

fn term_counts(text: &str) -> BTreeMap<String, u32> {
    let tokens = tokenize(text);
    let mut counts = BTreeMap::new();
    for t in &tokens {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    for pair in tokens.windows(2) {
        *counts.entry(format!("{} {}", pair[0], pair[1])).or_insert(0) += 1;
    }
    counts
}

/// Unigram and bigram TF-IDF vectors, max-normalized per document.
///
/// IDF is smoothed as `ln(1 + N / df)` so terms present in every document
/// keep a positive weight.
pub fn tfidf_extract<S, T>(corpus: &[(S, T)]) -> Result<BTreeMap<String, ConceptVector>>
where
    S: AsRef<str>,
    T: AsRef<str>,
{
    if corpus.is_empty() {
        return Err(JourneyError::arg("tf-idf corpus must not be empty"));
    }
    let docs: Vec<(&str, BTreeMap<String, u32>)> = corpus
        .iter()
        .map(|(id, text)| (id.as_ref(), term_counts(text.as_ref())))
        .collect();

    let mut df: HashMap<&str, u32> = HashMap::new();
    for (_, counts) in &docs {
        for term in counts.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let n = docs.len() as f64;

    let mut out = BTreeMap::new();
    for (id, counts) in &docs {
        let raw: Vec<(&str, f64)> = counts
            .iter()
            .map(|(term, tf)| {
                let idf = (1.0 + n / f64::from(df[term.as_str()])).ln();
                (term.as_str(), f64::from(*tf) * idf)
            })
            .collect();
        let max = raw.iter().map(|(_, w)| *w).fold(0.0, f64::max);
        let vector = if max > 0.0 {
            ConceptVector::from_pairs(raw.into_iter().map(|(t, w)| (t, w / max)))?
        } else {
            ConceptVector::new()
        };
        if out.insert(id.to_string(), vector).is_some() {
            return Err(JourneyError::input(format!("duplicate document id {id:?}")));
        }
    }
    Ok(out)
}
