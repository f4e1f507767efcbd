//! Golden-playlist evaluation: mixing playlists into synthetic users,
//! attributing extracted clusters to golden journeys, and the resulting
//! recall / precision / granularity figures.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{JourneyError, Result};
use crate::icpc::{ExtractionResult, JourneyCluster};
use crate::item::{Corpus, UserHistory};

/// A curated, ordered item list used as a ground-truth journey.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Playlist {
    pub playlist_id: String,
    #[serde(default)]
    pub name: String,
    pub item_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenJourney {
    pub journey_id: String,
    pub item_ids: Vec<String>,
}

impl From<&Playlist> for GoldenJourney {
    fn from(p: &Playlist) -> Self {
        Self {
            journey_id: p.playlist_id.clone(),
            item_ids: p.item_ids.clone(),
        }
    }
}

/// One synthetic user built by interleaving several golden journeys.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenInstance {
    pub user_id: String,
    pub golden: Vec<GoldenJourney>,
    pub mixed_history: UserHistory,
    pub seed: u64,
}

/// Uniform random interleaving that keeps each sequence's internal order.
///
/// At every step the next element is drawn from a sequence with probability
/// proportional to its remaining length, which makes every interleaving
/// equally likely.
pub fn riffle<T: Clone, R: Rng>(sequences: &[Vec<T>], rng: &mut R) -> Vec<T> {
    let mut cursors = vec![0usize; sequences.len()];
    let mut remaining: usize = sequences.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(remaining);
    while remaining > 0 {
        let mut pick = rng.random_range(0..remaining);
        for (s, seq) in sequences.iter().enumerate() {
            let left = seq.len() - cursors[s];
            if pick < left {
                out.push(seq[cursors[s]].clone());
                cursors[s] += 1;
                break;
            }
            pick -= left;
        }
        remaining -= 1;
    }
    out
}

/// Groups playlists `per_user` at a time (sampled without replacement) and
/// riffles each group into one mixed history. Leftover playlists are unused.
pub fn mix_playlists(playlists: &[Playlist], corpus: &Corpus, per_user: usize, seed: u64) -> Result<Vec<GoldenInstance>> {
    if per_user < 2 {
        return Err(JourneyError::arg(format!("per_user must be at least 2, got {per_user}")));
    }
    if playlists.len() < per_user {
        return Err(JourneyError::input(format!(
            "need at least {per_user} playlists, got {}",
            playlists.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..playlists.len()).collect();
    order.shuffle(&mut rng);
    order
        .chunks_exact(per_user)
        .enumerate()
        .map(|(u, chunk)| {
            let golden: Vec<GoldenJourney> = chunk.iter().map(|&p| GoldenJourney::from(&playlists[p])).collect();
            let sequences: Vec<Vec<String>> = golden.iter().map(|g| g.item_ids.clone()).collect();
            let mixed = riffle(&sequences, &mut rng);
            let user_id = format!("e2-user-{u:05}");
            Ok(GoldenInstance {
                mixed_history: corpus.history(&user_id, &mixed)?,
                user_id,
                golden,
                seed,
            })
        })
        .collect()
}

/// Extracted clusters attributed to one golden journey.
#[derive(Debug, Clone, PartialEq)]
pub struct JourneyMatch {
    pub journey_id: String,
    pub size: usize,
    /// `(cluster position, overlap)` for every attributed cluster.
    pub clusters: Vec<(usize, usize)>,
    /// Attributed cluster with the largest overlap (earliest on ties).
    pub best: Option<usize>,
}

impl JourneyMatch {
    pub fn best_overlap(&self) -> usize {
        self.best
            .and_then(|b| self.clusters.iter().find(|(c, _)| *c == b))
            .map_or(0, |(_, o)| *o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMatching {
    pub journeys: Vec<JourneyMatch>,
    /// Per extracted cluster: index into `journeys` and overlap, if any.
    pub attribution: Vec<Option<(usize, usize)>>,
    pub cluster_sizes: Vec<usize>,
}

/// Attributes each extracted cluster to the golden journey it overlaps most.
///
/// Ties prefer the larger golden journey, then the lower journey id.
/// Clusters sharing no item with any golden journey stay unattributed.
pub fn match_clusters(golden: &[GoldenJourney], extracted: &[JourneyCluster]) -> ClusterMatching {
    let sets: Vec<HashSet<&str>> = golden
        .iter()
        .map(|g| g.item_ids.iter().map(String::as_str).collect())
        .collect();
    let mut journeys: Vec<JourneyMatch> = golden
        .iter()
        .zip(&sets)
        .map(|(g, s)| JourneyMatch {
            journey_id: g.journey_id.clone(),
            size: s.len(),
            clusters: Vec::new(),
            best: None,
        })
        .collect();

    let mut attribution = Vec::with_capacity(extracted.len());
    for (c, cluster) in extracted.iter().enumerate() {
        let mut choice: Option<(usize, usize)> = None;
        for (j, set) in sets.iter().enumerate() {
            let overlap = cluster.members.iter().filter(|m| set.contains(m.as_str())).count();
            if overlap == 0 {
                continue;
            }
            let better = match choice {
                None => true,
                Some((cj, co)) => {
                    overlap > co
                        || (overlap == co
                            && (sets[j].len() > sets[cj].len()
                                || (sets[j].len() == sets[cj].len()
                                    && golden[j].journey_id < golden[cj].journey_id)))
                }
            };
            if better {
                choice = Some((j, overlap));
            }
        }
        if let Some((j, overlap)) = choice {
            let jm = &mut journeys[j];
            jm.clusters.push((c, overlap));
            if jm.best.is_none() || overlap > jm.best_overlap() {
                jm.best = Some(c);
            }
        }
        attribution.push(choice);
    }

    ClusterMatching {
        journeys,
        attribution,
        cluster_sizes: extracted.iter().map(JourneyCluster::len).collect(),
    }
}

/// Mean over golden journeys of the share of its items held by its best
/// cluster.
pub fn recall(golden: &[GoldenJourney], extracted: &[JourneyCluster]) -> Result<f64> {
    recall_of(&match_clusters(golden, extracted))
}

fn recall_of(m: &ClusterMatching) -> Result<f64> {
    if m.journeys.is_empty() {
        return Err(JourneyError::input("recall needs at least one golden journey"));
    }
    if m.journeys.iter().any(|j| j.size == 0) {
        return Err(JourneyError::input("golden journeys must not be empty"));
    }
    let total: f64 = m
        .journeys
        .iter()
        .map(|j| j.best_overlap() as f64 / j.size as f64)
        .sum();
    Ok(total / m.journeys.len() as f64)
}

/// Item-weighted share of extracted items that belong to their cluster's
/// attributed golden journey; zero when nothing was extracted.
pub fn precision(golden: &[GoldenJourney], extracted: &[JourneyCluster]) -> f64 {
    precision_of(&match_clusters(golden, extracted))
}

fn precision_of(m: &ClusterMatching) -> f64 {
    let items: usize = m.cluster_sizes.iter().sum();
    if items == 0 {
        return 0.0;
    }
    let correct: usize = m.attribution.iter().flatten().map(|(_, o)| *o).sum();
    correct as f64 / items as f64
}

/// Mean number of clusters attributed to each golden journey.
pub fn clusters_per_journey(golden: &[GoldenJourney], extracted: &[JourneyCluster]) -> f64 {
    clusters_per_journey_of(&match_clusters(golden, extracted))
}

fn clusters_per_journey_of(m: &ClusterMatching) -> f64 {
    if m.journeys.is_empty() {
        return 0.0;
    }
    m.journeys.iter().map(|j| j.clusters.len()).sum::<usize>() as f64 / m.journeys.len() as f64
}

/// Summary of a size distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

impl Distribution {
    pub fn of(values: &[usize]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut v = values.to_vec();
        v.sort_unstable();
        let n = v.len();
        let median = if n.is_multiple_of(2) {
            (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
        } else {
            v[n / 2] as f64
        };
        Self {
            count: n,
            min: v[0] as f64,
            median,
            mean: v.iter().sum::<usize>() as f64 / n as f64,
            max: v[n - 1] as f64,
        }
    }
}

/// Per-user granularity figures over unlabeled extraction results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularityStats {
    pub users: usize,
    pub min_size: usize,
    /// Mean over users of pruned items / items. Results are expected to be
    /// pruned at size 2, so pruned items are exactly the singletons.
    pub singleton_fraction: f64,
    pub journeys_per_user: f64,
    pub total_journeys: usize,
    pub items_per_journey: Distribution,
}

/// Counts journeys with at least `min_size` members and singleton shares.
pub fn granularity_stats(results: &[ExtractionResult], min_size: usize) -> Result<GranularityStats> {
    if results.is_empty() {
        return Err(JourneyError::input("granularity stats need at least one user"));
    }
    let mut fractions = Vec::new();
    let mut sizes = Vec::new();
    for r in results {
        let total = r.item_count();
        if total > 0 {
            fractions.push(r.pruned_items.len() as f64 / total as f64);
        }
        sizes.extend(r.journeys.iter().map(JourneyCluster::len).filter(|&n| n >= min_size));
    }
    let singleton_fraction = if fractions.is_empty() {
        0.0
    } else {
        fractions.iter().sum::<f64>() / fractions.len() as f64
    };
    Ok(GranularityStats {
        users: results.len(),
        min_size,
        singleton_fraction,
        journeys_per_user: sizes.len() as f64 / results.len() as f64,
        total_journeys: sizes.len(),
        items_per_journey: Distribution::of(&sizes),
    })
}

/// Scores for one extraction method over a set of golden instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub instances: usize,
    pub mean_recall: f64,
    pub mean_precision: f64,
    pub total_journeys: usize,
    pub clusters_per_journey: f64,
    pub journeys_per_user: f64,
    pub singleton_fraction: f64,
    pub items_per_journey: Distribution,
}

/// Scores `results[i]` against `instances[i]`.
pub fn evaluate(method: &str, instances: &[GoldenInstance], results: &[ExtractionResult]) -> Result<EvalReport> {
    if instances.is_empty() {
        return Err(JourneyError::input("evaluation needs at least one instance"));
    }
    if instances.len() != results.len() {
        return Err(JourneyError::arg(format!(
            "{} instances but {} results",
            instances.len(),
            results.len()
        )));
    }
    let (mut r_sum, mut p_sum, mut c_sum) = (0.0, 0.0, 0.0);
    for (inst, res) in instances.iter().zip(results) {
        let m = match_clusters(&inst.golden, &res.journeys);
        r_sum += recall_of(&m)?;
        p_sum += precision_of(&m);
        c_sum += clusters_per_journey_of(&m);
    }
    let n = instances.len() as f64;
    let granularity = granularity_stats(results, 1)?;
    Ok(EvalReport {
        method: method.to_string(),
        instances: instances.len(),
        mean_recall: r_sum / n,
        mean_precision: p_sum / n,
        total_journeys: granularity.total_journeys,
        clusters_per_journey: c_sum / n,
        journeys_per_user: granularity.journeys_per_user,
        singleton_fraction: granularity.singleton_fraction,
        items_per_journey: granularity.items_per_journey,
    })
}

/// Renders reports as an aligned text table.
pub fn report_table(reports: &[EvalReport]) -> String {
    let header = [
        "method", "users", "recall", "precision", "journeys", "clusters/journey", "journeys/user", "singletons",
    ];
    let rows: Vec<[String; 8]> = reports
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                r.instances.to_string(),
                format!("{:.4}", r.mean_recall),
                format!("{:.4}", r.mean_precision),
                r.total_journeys.to_string(),
                format!("{:.3}", r.clusters_per_journey),
                format!("{:.3}", r.journeys_per_user),
                format!("{:.3}", r.singleton_fraction),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[&str]| -> String {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(&header);
    out.push('\n');
    for r in &rows {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        out.push_str(&line(&cells));
        out.push('\n');
    }
    out
}
