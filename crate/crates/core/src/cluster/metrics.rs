//! Cluster evaluation on adjacency matrices.
//!
//! `d_w` compares each matrix with the approximation built from its own
//! singular values and its cluster mean's singular vectors; `d_b` does the
//! same for cluster means against the grand mean. `D` combines them with
//! Calinski-Harabasz degrees of freedom. The plain Frobenius sums of
//! squares (`WSS`, `BSS`) and their CH combination are reported alongside.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::adjacency::AdjacencyMatrix;
use crate::decomp::{svd, SvdFactors};
use crate::{Error, Result};

/// Sums below this fraction of the total squared mass are treated as zero.
const ZERO_TOLERANCE: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub d_w: f64,
    pub d_b: f64,
    /// `None` for a single cluster; `+inf` when `d_w` vanishes and `d_b` does
    /// not.
    pub d: Option<f64>,
    pub wss: f64,
    pub bss: f64,
    pub d_standard: Option<f64>,
}

/// Adjacency matrices together with their precomputed singular values, so
/// many partitions can be scored cheaply.
#[derive(Debug, Clone)]
pub struct MetricContext {
    mats: Vec<DMatrix<f64>>,
    singular_values: Vec<Vec<f64>>,
    m: usize,
}

impl MetricContext {
    pub fn new(mats: &[AdjacencyMatrix]) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::EmptyDataset(": no adjacency matrices".into()))?;
        let m = first.n_states();
        let dense: Vec<DMatrix<f64>> = mats.iter().map(AdjacencyMatrix::to_dmatrix).collect();
        let singular_values = dense
            .iter()
            .map(|t| svd(t).map(|f| f.s))
            .collect::<Result<_>>()?;
        Ok(Self {
            mats: dense,
            singular_values,
            m,
        })
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Cluster sizes and mean matrices. Labels must be `0..p` with every
    /// cluster nonempty.
    pub fn cluster_means(&self, assignments: &[usize]) -> Result<(Vec<usize>, Vec<DMatrix<f64>>)> {
        if assignments.len() != self.mats.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mats.len(),
                got: assignments.len(),
            });
        }
        let p = assignments.iter().max().map_or(0, |&k| k + 1);
        let mut sizes = vec![0usize; p];
        let mut sums = vec![DMatrix::zeros(self.m, self.m); p];
        for (t, &k) in self.mats.iter().zip(assignments) {
            sizes[k] += 1;
            sums[k] += t;
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidParameter(format!("cluster {k} is empty")));
        }
        for (s, &size) in sums.iter_mut().zip(&sizes) {
            *s /= size as f64;
        }
        Ok((sizes, sums))
    }

    pub fn grand_mean(&self) -> DMatrix<f64> {
        let mut sum = DMatrix::zeros(self.m, self.m);
        for t in &self.mats {
            sum += t;
        }
        sum / self.mats.len() as f64
    }

    pub fn within(&self, assignments: &[usize]) -> Result<f64> {
        let (_, means) = self.cluster_means(assignments)?;
        let factors = means.iter().map(svd).collect::<Result<Vec<_>>>()?;
        let mut total = 0.0;
        let mut mass = 0.0;
        for (i, &k) in assignments.iter().enumerate() {
            total += approximation_error(&self.mats[i], &factors[k], &self.singular_values[i]);
            mass += self.mats[i].norm_squared();
        }
        Ok(snap(total, mass))
    }

    pub fn between(&self, assignments: &[usize]) -> Result<f64> {
        let (sizes, means) = self.cluster_means(assignments)?;
        let grand = svd(&self.grand_mean())?;
        let mut total = 0.0;
        let mut mass = 0.0;
        for (mean, &size) in means.iter().zip(&sizes) {
            let s = svd(mean)?.s;
            total += size as f64 * approximation_error(mean, &grand, &s);
            mass += size as f64 * mean.norm_squared();
        }
        Ok(snap(total, mass))
    }

    pub fn report(&self, assignments: &[usize]) -> Result<MetricReport> {
        let (sizes, means) = self.cluster_means(assignments)?;
        let n = self.mats.len();
        let p = sizes.len();
        let grand = self.grand_mean();

        let mut wss = 0.0;
        let mut mass = 0.0;
        for (t, &k) in self.mats.iter().zip(assignments) {
            wss += (t - &means[k]).norm_squared();
            mass += t.norm_squared();
        }
        let mut bss = 0.0;
        for (mean, &size) in means.iter().zip(&sizes) {
            bss += size as f64 * (mean - &grand).norm_squared();
        }
        let (wss, bss) = (snap(wss, mass), snap(bss, mass));

        let d_w = self.within(assignments)?;
        let d_b = self.between(assignments)?;
        Ok(MetricReport {
            d_w,
            d_b,
            d: ch_ratio(d_b, d_w, n, p),
            wss,
            bss,
            d_standard: ch_ratio(bss, wss, n, p),
        })
    }
}

/// `||T - U diag(s) V^T||_F^2` with `U`, `V` taken from `reference`.
fn approximation_error(t: &DMatrix<f64>, reference: &SvdFactors, s: &[f64]) -> f64 {
    let mut approx = reference.u.clone();
    for (k, mut col) in approx.column_iter_mut().enumerate() {
        col *= s[k];
    }
    (t - approx * reference.v.transpose()).norm_squared()
}

fn snap(value: f64, mass: f64) -> f64 {
    if value <= ZERO_TOLERANCE * mass {
        0.0
    } else {
        value
    }
}

/// `(between / (p - 1)) / (within / (n - p))` with the degenerate cases
/// pinned: no value for one cluster, zero when `between` vanishes, `+inf`
/// when only `within` vanishes.
pub fn ch_ratio(between: f64, within: f64, n: usize, p: usize) -> Option<f64> {
    if p < 2 {
        return None;
    }
    if between == 0.0 {
        return Some(0.0);
    }
    if within == 0.0 || n == p {
        return Some(f64::INFINITY);
    }
    Some((between / (p - 1) as f64) / (within / (n - p) as f64))
}

pub fn within_metric(mats: &[AdjacencyMatrix], assignments: &[usize]) -> Result<f64> {
    MetricContext::new(mats)?.within(assignments)
}

pub fn between_metric(mats: &[AdjacencyMatrix], assignments: &[usize]) -> Result<f64> {
    MetricContext::new(mats)?.between(assignments)
}

pub fn metric_d(mats: &[AdjacencyMatrix], assignments: &[usize]) -> Result<MetricReport> {
    MetricContext::new(mats)?.report(assignments)
}
