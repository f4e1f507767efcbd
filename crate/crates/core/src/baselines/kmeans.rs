use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{JourneyError, Result};

/// Global item → cluster assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalAssignment {
    pub k: usize,
    pub centroid_dim: usize,
    pub assignment: BTreeMap<String, usize>,
    #[serde(default)]
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances after each assignment pass.
    #[serde(default)]
    pub objective: Vec<f64>,
}

impl GlobalAssignment {
    pub fn from_map(k: usize, centroid_dim: usize, assignment: BTreeMap<String, usize>) -> Self {
        Self {
            k,
            centroid_dim,
            assignment,
            centroids: Vec::new(),
            objective: Vec::new(),
        }
    }

    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((id, c)) = self.assignment.iter().find(|(_, &c)| c >= self.k) {
            return Err(JourneyError::input(format!(
                "item {id:?} assigned to cluster {c}, outside [0, {})",
                self.k
            )));
        }
        Ok(())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding.
fn seed_centroids(points: &[&Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..points.len())];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            // Every remaining point coincides with a centre.
            (0..points.len()).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Lloyd's algorithm with k-means++ initialization over `embeddings`.
pub fn kmeans(embeddings: &BTreeMap<String, Vec<f64>>, k: usize, max_iters: usize, seed: u64) -> Result<GlobalAssignment> {
    let n = embeddings.len();
    if k == 0 || k > n {
        return Err(JourneyError::arg(format!("k must be in [1, {n}], got {k}")));
    }
    let ids: Vec<&String> = embeddings.keys().collect();
    let points: Vec<&Vec<f64>> = embeddings.values().collect();
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(JourneyError::input("embeddings differ in length"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(&points, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut objective = Vec::new();
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        let mut total = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            total += d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        objective.push(total);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&labels) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for c in 0..k {
            // Empty clusters keep their previous centroid.
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }

    Ok(GlobalAssignment {
        k,
        centroid_dim: dim,
        assignment: ids.into_iter().cloned().zip(labels).collect(),
        centroids,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(coords: &[(&str, [f64; 2])]) -> BTreeMap<String, Vec<f64>> {
        coords.iter().map(|(id, p)| (id.to_string(), p.to_vec())).collect()
    }

    #[test]
    fn two_obvious_groups() {
        let e = pts(&[("a", [0.0, 0.0]), ("b", [0.0, 1.0]), ("c", [10.0, 10.0]), ("d", [10.0, 11.0])]);
        for seed in 0..10 {
            let g = kmeans(&e, 2, 50, seed).unwrap();
            assert_eq!(g.cluster_of("a"), g.cluster_of("b"));
            assert_eq!(g.cluster_of("c"), g.cluster_of("d"));
            assert_ne!(g.cluster_of("a"), g.cluster_of("c"));
        }
    }

    #[test]
    fn k_equals_n_gives_zero_objective() {
        let e = pts(&[("a", [0.0, 0.0]), ("b", [1.0, 0.0]), ("c", [0.0, 5.0])]);
        let g = kmeans(&e, 3, 10, 4).unwrap();
        let mut labels: Vec<_> = g.assignment.values().copied().collect();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2]);
        assert_eq!(*g.objective.last().unwrap(), 0.0);
    }

    #[test]
    fn duplicate_points_with_k_equal_n() {
        let e = pts(&[("a", [1.0, 1.0]), ("b", [1.0, 1.0])]);
        let g = kmeans(&e, 2, 10, 0).unwrap();
        assert_eq!(g.assignment.len(), 2);
        g.validate().unwrap();
    }

    #[test]
    fn deterministic_and_rejects_bad_k() {
        let e = pts(&[("a", [0.0, 0.0]), ("b", [3.0, 1.0]), ("c", [5.0, 5.0]), ("d", [6.0, 2.0])]);
        assert_eq!(kmeans(&e, 2, 20, 9).unwrap(), kmeans(&e, 2, 20, 9).unwrap());
        assert!(kmeans(&e, 0, 20, 9).is_err());
        assert!(kmeans(&e, 5, 20, 9).is_err());
    }
}
