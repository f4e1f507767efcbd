//! Interest-journey extraction from per-user interaction histories.
//!
//! The main entry point is [`icpc::extract_journeys`], which clusters one
//! user's history online in a sparse salient-term space. [`baselines`] holds
//! two global-cluster alternatives, [`eval`] scores any of them against
//! golden playlists, [`naming`] renders prompts that turn journeys into
//! names, and [`synth`] builds seeded corpora with planted journeys.

pub mod baselines;
pub mod concept;
pub mod error;
pub mod eval;
pub mod icpc;
pub mod io;
pub mod item;
pub mod naming;
pub mod pipeline;
pub mod synth;

pub use concept::{aggregate, cosine, ConceptVector};
pub use error::{JourneyError, Result};
pub use icpc::{extract_journeys, ExtractionResult, IcpcConfig, JourneyCluster};
pub use item::{Corpus, Item, UserHistory};
