//! Synthetic benchmark: Markov-chain scenario generators, matching-based
//! accuracy and a harness that times clustering methods on the scenarios.

mod accuracy;
mod bench;
mod markov;
mod scenario;

pub use accuracy::{bijective_accuracy, MAX_MATCHED_CLUSTERS};
pub use bench::{
    dataset_rng, lift_seed, run_benchmark, AmdcMethod, BenchmarkConfig, BenchmarkResult,
    ClusterMethod, DatasetRecord, HierarchicalMethod, MethodRun, SummaryRow,
};
pub use markov::{simulate, MarkovSpec};
pub use scenario::{
    build_scenario, Family, Overlap, ScenarioKey, ScenarioSpec, BASE_SELF_PROB, CATALOG_VERSION,
    LIFT_CONCENTRATION,
};
