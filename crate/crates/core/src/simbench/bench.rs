use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::accuracy::bijective_accuracy;
use super::scenario::{build_scenario, Overlap, ScenarioKey};
use crate::adjacency::WeightVector;
use crate::baseline::{distance_matrix, hier_fit_matrix, upgma};
use crate::cluster::{fit_prepared, prepare, FitConfig};
use crate::seqcore::SequenceSet;
use crate::{Error, Result};

/// What a clustering method reports for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    /// Cluster count picked by the method's own selection rule.
    pub selected_p: usize,
    /// Partition with the true number of clusters, used for accuracy.
    pub assignments_at_truth: Vec<usize>,
    /// Time spent building the method's data representation.
    pub prep: Duration,
    pub total: Duration,
}

/// A clustering method that can be benchmarked. External tools plug in by
/// implementing this trait.
pub trait ClusterMethod: Sync {
    fn name(&self) -> &str;
    fn run(&self, set: &SequenceSet, true_p: usize) -> Result<MethodRun>;
}

/// Adjacency-matrix decomposition with `D`-based selection.
#[derive(Debug, Clone, Default)]
pub struct AmdcMethod {
    pub config: FitConfig,
    pub weights: Option<WeightVector>,
}

impl ClusterMethod for AmdcMethod {
    fn name(&self) -> &str {
        "amdc"
    }

    fn run(&self, set: &SequenceSet, true_p: usize) -> Result<MethodRun> {
        let start = Instant::now();
        let prepared = prepare(set, self.weights.as_ref())?;
        let prep = start.elapsed();
        let model = fit_prepared(&prepared, &self.config)?;
        let at_truth = model.best_for_p(true_p).ok_or_else(|| {
            Error::InvalidParameter(format!("cluster-count grid does not contain {true_p}"))
        })?;
        Ok(MethodRun {
            selected_p: model.p,
            assignments_at_truth: at_truth.assignments.clone(),
            prep,
            total: start.elapsed(),
        })
    }
}

/// Levenshtein distances, average linkage and Dunn-index selection.
#[derive(Debug, Clone)]
pub struct HierarchicalMethod {
    pub p_grid: Vec<usize>,
}

impl Default for HierarchicalMethod {
    fn default() -> Self {
        Self {
            p_grid: (2..=10).collect(),
        }
    }
}

impl ClusterMethod for HierarchicalMethod {
    fn name(&self) -> &str {
        "hier"
    }

    fn run(&self, set: &SequenceSet, true_p: usize) -> Result<MethodRun> {
        let start = Instant::now();
        let dm = distance_matrix(set)?;
        let prep = start.elapsed();
        let fit = hier_fit_matrix(&dm, &self.p_grid)?;
        let at_truth = upgma(&dm).cut(true_p)?;
        Ok(MethodRun {
            selected_p: fit.p,
            assignments_at_truth: at_truth,
            prep,
            total: start.elapsed(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub scenarios: Vec<ScenarioKey>,
    pub orders: Vec<usize>,
    pub datasets: usize,
    pub n_sequences: usize,
    pub seq_len: usize,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            scenarios: ScenarioKey::catalog(),
            orders: vec![1],
            datasets: 50,
            n_sequences: 100,
            seq_len: 200,
            seed: 0,
        }
    }
}

impl BenchmarkConfig {
    /// Full-size runs: 500 datasets of 250 sequences of length 500.
    pub fn full_scale(mut self) -> Self {
        self.datasets = 500;
        self.n_sequences = 250;
        self.seq_len = 500;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetRecord {
    pub scenario: String,
    pub order: usize,
    pub replicate: usize,
    pub method: String,
    pub true_p: usize,
    pub accuracy: Option<f64>,
    pub selected_p: Option<usize>,
    pub error: Option<String>,
    #[serde(skip)]
    pub prep: Duration,
    #[serde(skip)]
    pub total: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub overlap: Overlap,
    pub kind: String,
    pub order: usize,
    pub method: String,
    pub true_p: usize,
    pub datasets: usize,
    pub failures: usize,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
    pub mode_p: Option<usize>,
    #[serde(skip)]
    pub prep_mean: Duration,
    #[serde(skip)]
    pub total_mean: Duration,
}

impl SummaryRow {
    pub fn scenario(&self) -> String {
        format!("{}-{}", self.kind, self.overlap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub summary: Vec<SummaryRow>,
    pub records: Vec<DatasetRecord>,
}

impl BenchmarkResult {
    pub fn row(&self, scenario: ScenarioKey, order: usize, method: &str) -> Option<&SummaryRow> {
        let label = scenario.to_string();
        self.summary
            .iter()
            .find(|r| r.scenario() == label && r.order == order && r.method == method)
    }
}

fn catalog_index(key: ScenarioKey) -> u64 {
    ScenarioKey::catalog()
        .iter()
        .position(|k| *k == key)
        .unwrap_or(0) as u64
}

/// Seed for lifting a scenario's chains to a higher order.
pub fn lift_seed(seed: u64, key: ScenarioKey) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(catalog_index(key) + 1)
}

/// Random source for one dataset. It depends on the scenario and replicate
/// but not on the order, so every order sees the same draws.
pub fn dataset_rng(seed: u64, key: ScenarioKey, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ replicate as u64);
    rng.set_stream(catalog_index(key));
    rng
}

/// Runs every method on `datasets` replicates of every scenario and order.
/// Failures are recorded per dataset and do not stop the run.
pub fn run_benchmark(
    config: &BenchmarkConfig,
    methods: &[&dyn ClusterMethod],
) -> Result<BenchmarkResult> {
    if config.scenarios.is_empty() || config.orders.is_empty() || methods.is_empty() {
        return Err(Error::InvalidParameter(
            "benchmark needs at least one scenario, order and method".into(),
        ));
    }
    if config.datasets == 0 {
        return Err(Error::InvalidParameter(
            "benchmark needs at least one dataset".into(),
        ));
    }
    let mut specs = Vec::new();
    for &key in &config.scenarios {
        for &order in &config.orders {
            let spec = build_scenario(key)?
                .with_size(config.n_sequences, config.seq_len)?
                .with_order(order, lift_seed(config.seed, key))?;
            specs.push(spec);
        }
    }
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..config.datasets).map(move |r| (s, r)))
        .collect();
    let records: Vec<DatasetRecord> = tasks
        .par_iter()
        .flat_map_iter(|&(s, replicate)| {
            let spec = &specs[s];
            let true_p = spec.n_clusters();
            let data = spec.generate(&mut dataset_rng(config.seed, spec.key, replicate));
            methods
                .iter()
                .map(|method| {
                    let mut record = DatasetRecord {
                        scenario: spec.key.to_string(),
                        order: spec.order(),
                        replicate,
                        method: method.name().to_string(),
                        true_p,
                        accuracy: None,
                        selected_p: None,
                        error: None,
                        prep: Duration::ZERO,
                        total: Duration::ZERO,
                    };
                    let outcome =
                        data.as_ref()
                            .map_err(|e| e.to_string())
                            .and_then(|(set, labels)| {
                                let run = method.run(set, true_p).map_err(|e| e.to_string())?;
                                let acc = bijective_accuracy(labels, &run.assignments_at_truth)
                                    .map_err(|e| e.to_string())?;
                                Ok((run, acc))
                            });
                    match outcome {
                        Ok((run, acc)) => {
                            record.accuracy = Some(acc);
                            record.selected_p = Some(run.selected_p);
                            record.prep = run.prep;
                            record.total = run.total;
                        }
                        Err(e) => record.error = Some(e),
                    }
                    record
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut summary = Vec::new();
    for spec in &specs {
        for method in methods {
            let label = spec.key.to_string();
            let rows: Vec<&DatasetRecord> = records
                .iter()
                .filter(|r| {
                    r.scenario == label && r.order == spec.order() && r.method == method.name()
                })
                .collect();
            summary.push(summarise(
                spec.key,
                spec.order(),
                method.name(),
                spec.n_clusters(),
                &rows,
            ));
        }
    }
    Ok(BenchmarkResult { summary, records })
}

fn summarise(
    key: ScenarioKey,
    order: usize,
    method: &str,
    true_p: usize,
    rows: &[&DatasetRecord],
) -> SummaryRow {
    let acc: Vec<f64> = rows.iter().filter_map(|r| r.accuracy).collect();
    let ok = acc.len();
    let mean = if ok > 0 {
        acc.iter().sum::<f64>() / ok as f64
    } else {
        f64::NAN
    };
    let sd = if ok > 1 {
        (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (ok - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for p in rows.iter().filter_map(|r| r.selected_p) {
        *counts.entry(p).or_default() += 1;
    }
    // Most frequent, smallest on ties.
    let mode_p = counts
        .iter()
        .fold(None::<(usize, usize)>, |best, (&p, &c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((p, c)),
        })
        .map(|(p, _)| p);
    let succeeded: Vec<&&DatasetRecord> = rows.iter().filter(|r| r.accuracy.is_some()).collect();
    let mean_duration = |f: fn(&DatasetRecord) -> Duration| {
        if succeeded.is_empty() {
            Duration::ZERO
        } else {
            succeeded.iter().map(|r| f(r)).sum::<Duration>() / succeeded.len() as u32
        }
    };
    SummaryRow {
        overlap: key.overlap,
        kind: key.kind(),
        order,
        method: method.to_string(),
        true_p,
        datasets: rows.len(),
        failures: rows.len() - ok,
        accuracy_mean: mean,
        accuracy_sd: sd,
        mode_p,
        prep_mean: mean_duration(|r| r.prep),
        total_mean: mean_duration(|r| r.total),
    }
}
