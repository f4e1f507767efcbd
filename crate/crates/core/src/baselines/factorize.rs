//! Seeded randomized low-rank factorization of a co-occurrence matrix.
//!
//! Counts are damped with `ln(1 + x)`. A Gaussian test matrix is pushed
//! through the damped matrix repeatedly (subspace iteration); the final
//! orthonormal basis `Q` gives the projected core `B = Qᵀ A Q`, whose
//! eigen-decomposition `B = V Λ Vᵀ` yields item embeddings `Q V |Λ|^½`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::CoocMatrix;
use crate::error::{JourneyError, Result};

/// Item embeddings plus the reconstruction error after each accepted
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub embeddings: BTreeMap<String, Vec<f64>>,
    /// Frobenius error `‖A − Q B Qᵀ‖` of the damped matrix, non-increasing.
    pub errors: Vec<f64>,
}

fn damped_times(m: &CoocMatrix, q: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(q.nrows(), q.ncols());
    for i in 0..m.len() {
        for (j, c) in m.row(i) {
            let w = (c as f64).ln_1p();
            for k in 0..q.ncols() {
                out[(i, k)] += w * q[(j, k)];
            }
        }
    }
    out
}

fn damped_norm_sq(m: &CoocMatrix) -> f64 {
    (0..m.len())
        .flat_map(|i| m.row(i).map(|(_, c)| (c as f64).ln_1p().powi(2)))
        .sum()
}

fn orthonormal(z: DMatrix<f64>) -> DMatrix<f64> {
    z.qr().q()
}

/// Projected core and the error of the rank-`dim` approximation for basis `q`.
fn core_and_error(m: &CoocMatrix, q: &DMatrix<f64>, norm_sq: f64) -> (DMatrix<f64>, f64) {
    let aq = damped_times(m, q);
    let mut b = q.transpose() * aq;
    // Symmetrize away rounding noise.
    b = (&b + b.transpose()) * 0.5;
    let err = (norm_sq - b.norm_squared()).max(0.0).sqrt();
    (b, err)
}

/// Factorizes the damped matrix into `dim`-length embeddings.
pub fn factorize(m: &CoocMatrix, dim: usize, iters: usize, seed: u64) -> Result<Factorization> {
    let n = m.len();
    if dim == 0 || dim > n {
        return Err(JourneyError::arg(format!(
            "factorization dim must be in [1, {n}], got {dim}"
        )));
    }
    if iters == 0 {
        return Err(JourneyError::arg("factorization needs at least one iteration"));
    }
    let norm_sq = damped_norm_sq(m);
    if norm_sq == 0.0 {
        return Ok(Factorization {
            embeddings: m.ids().iter().map(|id| (id.clone(), vec![0.0; dim])).collect(),
            errors: vec![0.0],
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(n, dim, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormal(damped_times(m, &omega));
    let (mut core, mut err) = core_and_error(m, &q, norm_sq);
    let mut errors = vec![err];
    for _ in 1..iters {
        let next_q = orthonormal(damped_times(m, &q));
        let (next_core, next_err) = core_and_error(m, &next_q, norm_sq);
        if !next_err.is_finite() || next_err > err {
            break;
        }
        let converged = err - next_err <= 1e-12 * norm_sq.sqrt();
        q = next_q;
        core = next_core;
        err = next_err;
        errors.push(err);
        if converged {
            break;
        }
    }

    let eig = SymmetricEigen::new(core);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
            .then(a.cmp(&b))
    });
    let mut basis = DMatrix::zeros(n, dim);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        // Fix the sign so the largest component is positive.
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v = -v;
        }
        let scale = eig.eigenvalues[k].abs().sqrt();
        basis.set_column(col, &(&q * v * scale));
    }

    let embeddings = m
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), basis.row(i).iter().copied().collect()))
        .collect();
    Ok(Factorization { embeddings, errors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_matrix(blocks: &[&[&str]]) -> CoocMatrix {
        let mut m = CoocMatrix::default();
        for block in blocks {
            for a in block.iter() {
                for b in block.iter() {
                    if a < b {
                        m.add_sequence(&[*a, *b]);
                    }
                }
            }
        }
        m
    }

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn two_blocks_separate() {
        let m = block_matrix(&[&["a", "b", "c"], &["d", "e", "f"]]);
        let f = factorize(&m, 2, 10, 7).unwrap();
        let group = |id: &str| if "abc".contains(id) { 0 } else { 1 };
        let ids: Vec<&String> = f.embeddings.keys().collect();
        let mut min_within = f64::INFINITY;
        let mut max_cross = f64::NEG_INFINITY;
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                let c = cos(&f.embeddings[*a], &f.embeddings[*b]);
                if group(a) == group(b) {
                    min_within = min_within.min(c);
                } else {
                    max_cross = max_cross.max(c);
                }
            }
        }
        assert!(min_within > max_cross, "{min_within} vs {max_cross}");
    }

    #[test]
    fn zero_matrix_gives_zero_embeddings() {
        let mut m = CoocMatrix::default();
        m.add_sequence(&["a"]);
        m.add_sequence(&["b"]);
        let f = factorize(&m, 2, 5, 1).unwrap();
        assert!(f.embeddings.values().all(|v| v.iter().all(|x| *x == 0.0)));
    }

    #[test]
    fn deterministic_and_monotone() {
        let m = block_matrix(&[&["a", "b", "c", "d"], &["e", "f", "g"], &["h", "i"]]);
        let f1 = factorize(&m, 2, 15, 3).unwrap();
        let f2 = factorize(&m, 2, 15, 3).unwrap();
        assert_eq!(f1, f2);
        assert!(f1.errors.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rejects_oversized_dim() {
        let m = block_matrix(&[&["a", "b"]]);
        assert!(matches!(factorize(&m, 3, 5, 0), Err(JourneyError::InvalidArgument(_))));
        assert!(factorize(&m, 0, 5, 0).is_err());
    }
}
