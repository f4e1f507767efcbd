//! Non-personalized baselines: global clusters built from behaviour
//! (co-occurrence + matrix factorization + k-means) or from dense content
//! embeddings (online two-level agglomerative clustering). A user's journeys
//! are the global clusters restricted to that user's items.

mod cooc;
mod factorize;
mod kmeans;
mod multimodal;

pub use cooc::{build_cooccurrence, cooc_extract, CoocExtraction, CoocMatrix};
pub use factorize::{factorize, Factorization};
pub use kmeans::{kmeans, GlobalAssignment};
pub use multimodal::{
    median_pair_distance, multimodal_extract, MacroCluster, MicroCluster, MultimodalModel,
    DEFAULT_MERGE_CONFLICTS,
};

/// Default number of global co-occurrence clusters at desk scale.
pub const DEFAULT_CLUSTERS: usize = 50;
/// Default embedding length for the co-occurrence factorization.
pub const DEFAULT_DIM: usize = 16;
/// Default subspace iterations for the factorization.
pub const DEFAULT_FACTOR_ITERS: usize = 20;
/// Default Lloyd iteration cap.
pub const DEFAULT_KMEANS_ITERS: usize = 100;
