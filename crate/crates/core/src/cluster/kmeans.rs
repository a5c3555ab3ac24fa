//! Lloyd's k-means with k-means++ seeding and seeded restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    /// Row-major `p x dim` centers.
    pub centers: Vec<f64>,
    /// Within-cluster sum of squared distances.
    pub objective: f64,
    pub iterations: usize,
    /// Objective after every center update of the winning restart.
    pub history: Vec<f64>,
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center, lowest index on ties.
pub(crate) fn nearest(point: &[f64], centers: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.chunks_exact(dim).enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// Clusters the `n x dim` row-major `points` into `p` groups. The best of
/// `restarts` runs by objective is returned; earlier restarts win ties.
pub fn kmeans(
    points: &[f64],
    dim: usize,
    p: usize,
    restarts: usize,
    seed: u64,
) -> Result<KMeansResult> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: points.len(),
        });
    }
    let n = points.len() / dim;
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count must be in 1..={n}, got {p}"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter(
            "at least one restart is required".into(),
        ));
    }
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let centers = plus_plus(points, dim, p, &mut rng);
        let run = lloyd(points, dim, centers);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn plus_plus(points: &[f64], dim: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len() / dim;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut centers = Vec::with_capacity(p * dim);
    centers.extend_from_slice(row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(row(i), &centers[..dim])).collect();
    for _ in 1..p {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // Guard against rounding leaving a zero-weight point selected.
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&d| d > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let start = centers.len();
        centers.extend_from_slice(row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(row(i), &centers[start..]));
        }
    }
    centers
}

fn lloyd(points: &[f64], dim: usize, mut centers: Vec<f64>) -> KMeansResult {
    let n = points.len() / dim;
    let p = centers.len() / dim;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut assignments = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let mut changed = false;
        for i in 0..n {
            let (k, d) = nearest(row(i), &centers, dim);
            if assignments[i] != k {
                assignments[i] = k;
                changed = true;
            }
            dists[i] = d;
        }
        changed |= fill_empty(points, dim, &mut centers, &mut assignments, &mut dists);
        if !changed || iterations >= MAX_ITERATIONS {
            break;
        }
        update_centers(points, dim, p, &assignments, &mut centers);
        history.push(objective(points, dim, &centers, &assignments));
    }
    // The loop leaves centers as the means of the final partition.
    update_centers(points, dim, p, &assignments, &mut centers);
    let objective = objective(points, dim, &centers, &assignments);
    KMeansResult {
        assignments,
        centers,
        objective,
        iterations,
        history,
    }
}

/// Moves the point farthest from its center (among clusters with more than
/// one member) into each empty cluster.
fn fill_empty(
    points: &[f64],
    dim: usize,
    centers: &mut [f64],
    assignments: &mut [usize],
    dists: &mut [f64],
) -> bool {
    let p = centers.len() / dim;
    let mut sizes = vec![0usize; p];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    let mut changed = false;
    for k in 0..p {
        if sizes[k] > 0 {
            continue;
        }
        let mut far: Option<usize> = None;
        for i in 0..assignments.len() {
            if sizes[assignments[i]] > 1 && far.is_none_or(|f| dists[i] > dists[f]) {
                far = Some(i);
            }
        }
        let Some(i) = far else { break };
        sizes[assignments[i]] -= 1;
        sizes[k] = 1;
        assignments[i] = k;
        dists[i] = 0.0;
        centers[k * dim..(k + 1) * dim].copy_from_slice(&points[i * dim..(i + 1) * dim]);
        changed = true;
    }
    changed
}

fn update_centers(
    points: &[f64],
    dim: usize,
    p: usize,
    assignments: &[usize],
    centers: &mut [f64],
) {
    let mut sums = vec![0.0; p * dim];
    let mut counts = vec![0usize; p];
    for (i, &k) in assignments.iter().enumerate() {
        counts[k] += 1;
        for d in 0..dim {
            sums[k * dim + d] += points[i * dim + d];
        }
    }
    for k in 0..p {
        if counts[k] > 0 {
            for d in 0..dim {
                centers[k * dim + d] = sums[k * dim + d] / counts[k] as f64;
            }
        }
    }
}

fn objective(points: &[f64], dim: usize, centers: &[f64], assignments: &[usize]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            sq_dist(
                &points[i * dim..(i + 1) * dim],
                &centers[k * dim..(k + 1) * dim],
            )
        })
        .sum()
}
