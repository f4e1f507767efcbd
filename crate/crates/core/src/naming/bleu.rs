//! Sentence-level BLEU with add-one smoothing for higher-order n-grams.

use std::collections::HashMap;

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for g in tokens.windows(n) {
        *counts.entry(g).or_insert(0) += 1;
    }
    counts
}

/// Overlap score in `[0, 1]` between a candidate and a reference string.
///
/// Uses n-gram orders up to `min(max_n, candidate length)`. Unigram precision
/// is unsmoothed; higher orders use `(matches + 1) / (total + 1)`. The
/// geometric mean is scaled by the brevity penalty `min(1, e^(1 − r/c))`.
/// Both strings are lowercased and split on whitespace.
pub fn bleu(candidate: &str, reference: &str, max_n: usize) -> f64 {
    let cand: Vec<String> = candidate.split_whitespace().map(str::to_lowercase).collect();
    let refs: Vec<String> = reference.split_whitespace().map(str::to_lowercase).collect();
    if cand.is_empty() {
        return 0.0;
    }
    let orders = max_n.max(1).min(cand.len());
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let c = ngrams(&cand, n);
        let r = ngrams(&refs, n);
        let total: usize = c.values().sum();
        let matched: usize = c.iter().map(|(g, k)| (*k).min(r.get(g).copied().unwrap_or(0))).sum();
        let p = if n == 1 {
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    let geo = (log_sum / orders as f64).exp();
    let bp = (1.0 - refs.len() as f64 / cand.len() as f64).exp().min(1.0);
    (geo * bp).clamp(0.0, 1.0)
}
