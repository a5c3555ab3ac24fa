//! Adjacency matrix decomposition clustering (AMDC) for categorical sequences.
//!
//! Each sequence is summarised by its matrix of state-to-state transition
//! counts. The vectorised matrices are stacked into a data matrix, centered,
//! and decomposed with a thin SVD; k-means on the leading right singular
//! vectors yields the clustering, and an adjacency-aware Calinski-Harabasz
//! style index selects the embedding dimension and the number of clusters.
//!
//! Alongside the method itself the crate carries the Levenshtein /
//! average-linkage baseline, a Markov-chain simulation benchmark, bootstrap
//! stability analysis and the contribution diagnostic.

pub mod adjacency;
pub mod baseline;
pub mod cluster;
pub mod decomp;
mod error;
pub mod seqcore;
pub mod simbench;
pub mod stability;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
