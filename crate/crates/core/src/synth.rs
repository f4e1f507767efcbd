//! Seeded synthetic corpora with planted journeys.
//!
//! Every golden journey owns a private vocabulary whose first term (the
//! anchor) appears in each of its items with salience 1.0. A global pool of
//! shared terms is mixed into every vocabulary, and optional noise terms come
//! from a separate pool. Items also get a dense embedding: their journey's
//! Gaussian centroid plus isotropic jitter.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::concept::ConceptVector;
use crate::error::{JourneyError, Result};
use crate::eval::{riffle, Playlist};
use crate::io::HistoryRecord;
use crate::item::{Corpus, Item};

const SYLLABLES: [&str; 16] = [
    "ba", "ko", "mi", "ru", "se", "ta", "vi", "zo", "ne", "pa", "du", "fe", "li", "go", "ha", "ju",
];
const MIN_TERMS: usize = 3;
const MAX_TERMS: usize = 6;
const BASE_TS: i64 = 1_600_000_000;

fn default_vocab() -> usize {
    10
}
fn default_dense_dim() -> usize {
    16
}
fn default_jitter() -> f64 {
    0.05
}
fn default_noise_vocab() -> usize {
    500
}
fn default_sub_journeys() -> usize {
    1
}
fn default_sub_shared() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_users: usize,
    pub journeys_per_user: usize,
    pub items_per_journey: usize,
    #[serde(default = "default_vocab")]
    pub vocab_per_journey: usize,
    /// Share of each vocabulary drawn from the global shared pool.
    #[serde(default)]
    pub shared_vocab_fraction: f64,
    #[serde(default)]
    pub noise_terms_per_item: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dense_dim")]
    pub dense_dim: usize,
    /// Jitter norm as a fraction of the mean centroid spacing.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
    #[serde(default = "default_noise_vocab")]
    pub noise_vocab: usize,
    /// Sub-journeys per golden journey; above 1 builds a two-level corpus.
    #[serde(default = "default_sub_journeys")]
    pub sub_journeys: usize,
    /// Share of a journey's private vocabulary common to all its sub-journeys.
    #[serde(default = "default_sub_shared")]
    pub sub_shared_fraction: f64,
}

impl SynthSpec {
    pub fn new(n_users: usize, journeys_per_user: usize, items_per_journey: usize) -> Self {
        Self {
            n_users,
            journeys_per_user,
            items_per_journey,
            vocab_per_journey: default_vocab(),
            shared_vocab_fraction: 0.0,
            noise_terms_per_item: 0,
            seed: 0,
            dense_dim: default_dense_dim(),
            jitter: default_jitter(),
            noise_vocab: default_noise_vocab(),
            sub_journeys: default_sub_journeys(),
            sub_shared_fraction: default_sub_shared(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shared(mut self, fraction: f64) -> Self {
        self.shared_vocab_fraction = fraction;
        self
    }

    pub fn with_noise(mut self, terms: usize) -> Self {
        self.noise_terms_per_item = terms;
        self
    }

    pub fn with_sub_journeys(mut self, subs: usize, shared: f64) -> Self {
        self.sub_journeys = subs;
        self.sub_shared_fraction = shared;
        self
    }

    fn shared_terms(&self) -> usize {
        (self.shared_vocab_fraction * self.vocab_per_journey as f64).round() as usize
    }

    /// `(terms common to all sub-journeys, terms private to each sub-journey)`.
    fn private_split(&self) -> (usize, usize) {
        let private = self.vocab_per_journey - self.shared_terms();
        if self.sub_journeys <= 1 {
            (private, 0)
        } else {
            let common = ((self.sub_shared_fraction * private as f64).round() as usize).max(1);
            (common, private.saturating_sub(common))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_users", self.n_users),
            ("journeys_per_user", self.journeys_per_user),
            ("items_per_journey", self.items_per_journey),
            ("dense_dim", self.dense_dim),
            ("sub_journeys", self.sub_journeys),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(JourneyError::arg(format!("{name} must be at least 1")));
        }
        for (name, f) in [
            ("shared_vocab_fraction", self.shared_vocab_fraction),
            ("sub_shared_fraction", self.sub_shared_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(JourneyError::arg(format!("{name} must lie in [0, 1], got {f}")));
            }
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(JourneyError::arg("jitter must be finite and non-negative"));
        }
        if self.vocab_per_journey < MIN_TERMS {
            return Err(JourneyError::arg(format!(
                "vocab_per_journey must be at least {MIN_TERMS}, got {}",
                self.vocab_per_journey
            )));
        }
        if self.vocab_per_journey == self.shared_terms() {
            return Err(JourneyError::arg("shared pool leaves no private journey terms"));
        }
        if self.sub_journeys > 1 && self.private_split().1 == 0 {
            return Err(JourneyError::arg("sub-journeys need private terms beyond the common share"));
        }
        if self.noise_terms_per_item > self.noise_vocab {
            return Err(JourneyError::arg("noise_terms_per_item exceeds noise_vocab"));
        }
        Ok(())
    }
}

/// Items, golden playlists and user histories of one synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub items: Vec<Item>,
    pub playlists: Vec<Playlist>,
    pub histories: Vec<HistoryRecord>,
}

impl SynthCorpus {
    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::new(self.items.clone())
    }

    /// Playlists belonging to history `user`.
    pub fn playlists_of(&self, user: usize, journeys_per_user: usize) -> &[Playlist] {
        &self.playlists[user * journeys_per_user..(user + 1) * journeys_per_user]
    }
}

/// Deterministic pseudo-word for a vocabulary index.
fn word(index: usize) -> String {
    let mut out = String::with_capacity(8);
    let mut i = index;
    for _ in 0..4 {
        out.push_str(SYLLABLES[i % SYLLABLES.len()]);
        i /= SYLLABLES.len();
    }
    if i > 0 {
        out.push_str(&i.to_string());
    }
    out
}

struct Words(usize);

impl Words {
    fn take(&mut self, n: usize) -> Vec<String> {
        let out = (self.0..self.0 + n).map(word).collect();
        self.0 += n;
        out
    }
}

fn salience<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(0.1..=1.0)
}

/// Generates a corpus for `spec`.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut words = Words(0);
    let shared_pool = words.take(spec.shared_terms());
    let noise_pool = words.take(spec.noise_vocab);
    let (common, per_sub) = spec.private_split();

    let dim = spec.dense_dim;
    // Centroids are standard normal, so the mean spacing is about sqrt(2 dim).
    let spacing = (2.0 * dim as f64).sqrt();
    let jitter = Normal::new(0.0, spec.jitter * spacing / (dim as f64).sqrt())
        .map_err(|e| JourneyError::arg(e.to_string()))?;

    let mut items = Vec::new();
    let mut playlists = Vec::new();
    let mut histories = Vec::new();
    let mut next_item = 0usize;

    for user in 0..spec.n_users {
        let mut journeys: Vec<Vec<String>> = Vec::with_capacity(spec.journeys_per_user);
        for _ in 0..spec.journeys_per_user {
            let journey_idx = playlists.len();
            let private = words.take(common);
            // A flat journey is anchored by its first private term. In a
            // two-level corpus each sub-journey has its own anchor and the
            // common terms are what its siblings share.
            let (anchors, common_terms): (Vec<String>, &[String]) = if spec.sub_journeys <= 1 {
                (vec![private[0].clone()], &private[1..])
            } else {
                (words.take(spec.sub_journeys), &private[..])
            };
            let subs: Vec<Vec<String>> = (0..spec.sub_journeys)
                .map(|_| {
                    let mut vocab: Vec<String> = common_terms.to_vec();
                    vocab.extend(words.take(per_sub));
                    vocab.extend(shared_pool.iter().cloned());
                    vocab
                })
                .collect();
            let centroid: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();

            let mut ids = Vec::with_capacity(spec.items_per_journey);
            for k in 0..spec.items_per_journey {
                let sub = k * spec.sub_journeys / spec.items_per_journey;
                let vocab = &subs[sub];
                let anchor = &anchors[sub];
                let n_terms = rng.random_range(MIN_TERMS..=MAX_TERMS).min(vocab.len() + 1);
                let picked: Vec<&String> = sample(&mut rng, vocab.len(), n_terms - 1)
                    .into_iter()
                    .map(|i| &vocab[i])
                    .collect();
                let mut pairs: Vec<(String, f64)> = vec![(anchor.clone(), 1.0)];
                pairs.extend(picked.iter().map(|t| ((*t).clone(), salience(&mut rng))));
                let title = std::iter::once(anchor)
                    .chain(picked.iter().copied())
                    .map(String::as_str)
                    .collect::<Vec<_>>()
                    .join(" ");
                for i in sample(&mut rng, noise_pool.len(), spec.noise_terms_per_item) {
                    pairs.push((noise_pool[i].clone(), salience(&mut rng)));
                }
                let dense = centroid.iter().map(|c| c + jitter.sample(&mut rng)).collect();
                let id = format!("it{next_item:06}");
                next_item += 1;
                items.push(Item {
                    id: id.clone(),
                    title,
                    timestamp: 0,
                    concepts: ConceptVector::from_pairs(pairs)?,
                    dense: Some(dense),
                });
                ids.push(id);
            }
            playlists.push(Playlist {
                playlist_id: format!("pl{journey_idx:05}"),
                name: anchors.join(" "),
                item_ids: ids.clone(),
            });
            journeys.push(ids);
        }
        let order = riffle(&journeys, &mut rng);
        histories.push(HistoryRecord {
            user_id: format!("user{user:05}"),
            item_ids: order,
        });
    }

    // Timestamps follow each user's interaction order.
    let position: std::collections::HashMap<&str, (usize, usize)> = histories
        .iter()
        .enumerate()
        .flat_map(|(u, h)| h.item_ids.iter().enumerate().map(move |(p, id)| (id.as_str(), (u, p))))
        .collect();
    let stamps: Vec<i64> = items
        .iter()
        .map(|it| {
            let (u, p) = position[it.id.as_str()];
            BASE_TS + (u as i64) * 86_400 + (p as i64) * 60
        })
        .collect();
    for (it, ts) in items.iter_mut().zip(stamps) {
        it.timestamp = ts;
    }

    Ok(SynthCorpus {
        items,
        playlists,
        histories,
    })
}
