//! K-means on the embedding, matrix-based cluster metrics and model
//! selection over the embedding dimension and cluster count.

mod fit;
mod kmeans;
mod metrics;

pub use fit::{
    assign, fit, fit_prepared, prepare, ClusterModel, FitConfig, GridEntry, Prepared, Projection,
};
pub use kmeans::{kmeans, KMeansResult, MAX_ITERATIONS};
pub use metrics::{between_metric, ch_ratio, metric_d, within_metric, MetricContext, MetricReport};
