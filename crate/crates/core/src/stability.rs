//! Bootstrap stability of a fitted clustering.
//!
//! Each replicate resamples groups with replacement, then sequences within
//! every sampled group up to that group's original size, refits on the
//! replicate and maps the original sequences to the replicate's nearest
//! centers. An observation's score for one replicate is the Jaccard index
//! between the sets of other observations sharing its cluster in the
//! reference and in the replicate partition. Its stability is the mean
//! over replicates.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::{assign, fit, ClusterModel, FitConfig};
use crate::seqcore::SequenceSet;
use crate::{Error, Result};

pub const DEFAULT_REPLICATES: usize = 100;

/// Two-stage resample: groups with replacement, then each sampled group's
/// sequences with replacement up to its original count.
pub fn resample<R: Rng>(set: &SequenceSet, rng: &mut R) -> Result<SequenceSet> {
    let groups = set.group_members();
    let mut picks = Vec::with_capacity(set.len());
    for _ in 0..groups.len() {
        let members = &groups[rng.random_range(0..groups.len())].1;
        for _ in 0..members.len() {
            picks.push(members[rng.random_range(0..members.len())]);
        }
    }
    set.select(&picks)
}

/// The grids, restarts and seed the reference model was fitted with.
pub fn refit_config(model: &ClusterModel) -> FitConfig {
    let mut h: Vec<usize> = model.grid.iter().map(|e| e.h).collect();
    let mut p: Vec<usize> = model.grid.iter().map(|e| e.p).collect();
    h.sort_unstable();
    h.dedup();
    p.sort_unstable();
    p.dedup();
    FitConfig {
        h_grid: Some(h),
        p_grid: p,
        restarts: model.restarts,
        seed: model.seed,
    }
}

/// Fits `replicate` and assigns every sequence of `original` to the nearest
/// replicate center. Returns the partition and the replicate's cluster count.
pub fn partition_from_replicate(
    original: &SequenceSet,
    replicate: &SequenceSet,
    model: &ClusterModel,
    config: &FitConfig,
) -> Result<(Vec<usize>, usize)> {
    let rep = fit(replicate, model.projection.weights.as_ref(), config)?;
    let points = rep.project(original)?;
    Ok((assign(&rep, &points)?, rep.p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bootstrap {
    /// One partition of the original sequences per successful replicate.
    pub partitions: Vec<Vec<usize>>,
    /// Cluster count selected by each successful replicate.
    pub selected_p: Vec<usize>,
    /// Replicate index and error message of every failed refit.
    pub failures: Vec<(usize, String)>,
}

pub fn bootstrap_partitions(
    set: &SequenceSet,
    model: &ClusterModel,
    replicates: usize,
    seed: u64,
) -> Result<Bootstrap> {
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "at least one replicate is required".into(),
        ));
    }
    if model.assignments.len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            got: model.assignments.len(),
        });
    }
    let config = refit_config(model);
    let outcomes: Vec<Result<(Vec<usize>, usize)>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let replicate = resample(set, &mut rng)?;
            partition_from_replicate(set, &replicate, model, &config)
        })
        .collect();
    let mut out = Bootstrap {
        partitions: Vec::new(),
        selected_p: Vec::new(),
        failures: Vec::new(),
    };
    for (b, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((partition, p)) => {
                out.partitions.push(partition);
                out.selected_p.push(p);
            }
            Err(e) => out.failures.push((b, e.to_string())),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStability {
    pub cluster: usize,
    pub size: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Number of replicates the scores average over.
    pub replicates: usize,
    pub failed_replicates: usize,
    pub scores: Vec<f64>,
    pub clusters: Vec<ClusterStability>,
    pub mean: f64,
    pub median: f64,
    /// How many replicates produced each cluster count.
    pub cluster_counts: BTreeMap<usize, usize>,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen = BTreeMap::new();
    let out = labels
        .iter()
        .map(|&x| {
            let next = seen.len();
            *seen.entry(x).or_insert(next)
        })
        .collect();
    (out, seen.len())
}

/// Per-observation Jaccard stability of `reference` against `partitions`.
/// Cluster counts in the report are the numbers of distinct labels in each
/// partition.
pub fn stability_scores(reference: &[usize], partitions: &[Vec<usize>]) -> Result<StabilityReport> {
    let n = reference.len();
    if n == 0 {
        return Err(Error::EmptyDataset(": no observations to score".into()));
    }
    if partitions.is_empty() {
        return Err(Error::InvalidParameter("no partitions to compare".into()));
    }
    let (ref_labels, p_ref) = compact(reference);
    let mut ref_sizes = vec![0usize; p_ref];
    for &a in &ref_labels {
        ref_sizes[a] += 1;
    }

    let mut totals = vec![0.0; n];
    let mut cluster_counts = BTreeMap::new();
    for part in partitions {
        if part.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: part.len(),
            });
        }
        let (labels, p) = compact(part);
        *cluster_counts.entry(p).or_insert(0) += 1;
        let mut sizes = vec![0usize; p];
        let mut joint = vec![0usize; p_ref * p];
        for (&a, &c) in ref_labels.iter().zip(&labels) {
            sizes[c] += 1;
            joint[a * p + c] += 1;
        }
        for i in 0..n {
            let (a, c) = (ref_labels[i], labels[i]);
            let both = joint[a * p + c] - 1;
            let union = (ref_sizes[a] - 1) + (sizes[c] - 1) - both;
            totals[i] += if union == 0 {
                1.0
            } else {
                both as f64 / union as f64
            };
        }
    }
    let b = partitions.len() as f64;
    let scores: Vec<f64> = totals.iter().map(|t| t / b).collect();

    let clusters = (0..p_ref)
        .map(|k| {
            let members: Vec<f64> = (0..n)
                .filter(|&i| ref_labels[i] == k)
                .map(|i| scores[i])
                .collect();
            ClusterStability {
                // Report clusters under their original labels.
                cluster: reference[ref_labels.iter().position(|&x| x == k).expect("nonempty")],
                size: members.len(),
                mean: members.iter().sum::<f64>() / members.len() as f64,
                median: median(&members),
            }
        })
        .collect();
    Ok(StabilityReport {
        replicates: partitions.len(),
        failed_replicates: 0,
        mean: scores.iter().sum::<f64>() / n as f64,
        median: median(&scores),
        scores,
        clusters,
        cluster_counts,
    })
}

/// Bootstrap the model and score it. Cluster counts are the counts the
/// replicate fits selected.
pub fn stability(
    set: &SequenceSet,
    model: &ClusterModel,
    replicates: usize,
    seed: u64,
) -> Result<StabilityReport> {
    let boot = bootstrap_partitions(set, model, replicates, seed)?;
    if boot.partitions.is_empty() {
        return Err(Error::Numerical(format!(
            "every replicate failed; first error: {}",
            boot.failures.first().map_or("", |f| f.1.as_str())
        )));
    }
    let mut report = stability_scores(&model.assignments, &boot.partitions)?;
    report.failed_replicates = boot.failures.len();
    report.cluster_counts = BTreeMap::new();
    for p in boot.selected_p {
        *report.cluster_counts.entry(p).or_insert(0) += 1;
    }
    Ok(report)
}
