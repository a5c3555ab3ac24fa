//! Edit-distance baseline: pairwise Levenshtein distances, average-linkage
//! agglomerative clustering and Dunn-index selection of the cluster count.

use rayon::prelude::*;
use serde::Serialize;

use crate::seqcore::SequenceSet;
use crate::{Error, Result};

/// Unit-cost edit distance between two state sequences.
pub fn levenshtein(a: &[u8], b: &[u8]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<u32> = (0..=b.len() as u32).collect();
    let mut curr = vec![0u32; b.len() + 1];
    for (i, &x) in a.iter().enumerate() {
        curr[0] = i as u32 + 1;
        for (j, &y) in b.iter().enumerate() {
            let substitute = prev[j] + u32::from(x != y);
            let delete = prev[j + 1] + 1;
            let insert = curr[j] + 1;
            curr[j + 1] = substitute.min(delete).min(insert);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()] as usize
}

/// Dense symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major entries, checking shape, symmetry,
    /// the diagonal and nonnegativity.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is nonzero"
                )));
            }
            for j in 0..i {
                let d = data[i * n + j];
                if !(d >= 0.0 && d.is_finite()) || d != data[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Levenshtein distances between all pairs of sequences, computed in
/// parallel.
pub fn distance_matrix(set: &SequenceSet) -> Result<DistanceMatrix> {
    let n = set.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two sequences, got {n}"
        )));
    }
    let seqs = set.sequences();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| levenshtein(seqs[i].states(), seqs[j].states()) as f64)
                .collect()
        })
        .collect();
    let mut data = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &d) in row.iter().enumerate() {
            let j = i + 1 + off;
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// One agglomeration step. Leaves are `0..n`; the cluster formed at step
/// `k` gets id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_leaves(&self) -> usize {
        self.n
    }

    /// Flat clustering with `p` clusters, labelled by first appearance.
    pub fn cut(&self, p: usize) -> Result<Vec<usize>> {
        if p == 0 || p > self.n {
            return Err(Error::InvalidParameter(format!(
                "cluster count must be in 1..={}, got {p}",
                self.n
            )));
        }
        let total = self.n + self.merges.len();
        let mut parent: Vec<usize> = (0..total).collect();
        for (k, m) in self.merges[..self.n - p].iter().enumerate() {
            parent[m.left] = self.n + k;
            parent[m.right] = self.n + k;
        }
        let root = |mut x: usize| {
            while parent[x] != x {
                x = parent[x];
            }
            x
        };
        Ok(first_appearance((0..self.n).map(root)))
    }
}

fn first_appearance(ids: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut seen = std::collections::HashMap::new();
    ids.map(|id| {
        let next = seen.len();
        *seen.entry(id).or_insert(next)
    })
    .collect()
}

/// Average-linkage (UPGMA) agglomeration. Among equally close pairs the one
/// with the smallest `(i, j)` slot indices merges first; a merged cluster
/// keeps the lower slot.
pub fn upgma(dm: &DistanceMatrix) -> Dendrogram {
    let n = dm.n;
    let mut d = dm.data.clone();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut id: Vec<usize> = (0..n).collect();
    // Nearest active neighbour with a larger slot index, per slot.
    let mut nn: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); n];
    let row_min = |d: &[f64], active: &[bool], i: usize| {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in i + 1..n {
            if active[j] && d[i * n + j] < best.0 {
                best = (d[i * n + j], j);
            }
        }
        best
    };
    for (i, slot) in nn.iter_mut().enumerate() {
        *slot = row_min(&d, &active, i);
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut i = usize::MAX;
        for k in 0..n {
            if active[k] && nn[k].1 != usize::MAX && (i == usize::MAX || nn[k].0 < nn[i].0) {
                i = k;
            }
        }
        let (height, j) = nn[i];
        let (si, sj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if active[k] && k != i && k != j {
                let v = (si * d[i * n + k] + sj * d[j * n + k]) / (si + sj);
                d[i * n + k] = v;
                d[k * n + i] = v;
            }
        }
        active[j] = false;
        size[i] += size[j];
        merges.push(Merge {
            left: id[i],
            right: id[j],
            height,
            size: size[i],
        });
        id[i] = n + step;

        nn[j] = (f64::INFINITY, usize::MAX);
        nn[i] = row_min(&d, &active, i);
        for k in 0..i {
            if !active[k] {
                continue;
            }
            if nn[k].1 == j || nn[k].1 == i {
                nn[k] = row_min(&d, &active, k);
            } else if d[k * n + i] < nn[k].0 || (d[k * n + i] == nn[k].0 && i < nn[k].1) {
                nn[k] = (d[k * n + i], i);
            }
        }
        for k in i + 1..j {
            if active[k] && nn[k].1 == j {
                nn[k] = row_min(&d, &active, k);
            }
        }
    }
    Dendrogram { n, merges }
}

/// Cuts the average-linkage tree into `p` clusters.
pub fn hierarchical(dm: &DistanceMatrix, p: usize) -> Result<Vec<usize>> {
    if p < 1 || p > dm.n {
        return Err(Error::InvalidParameter(format!(
            "cluster count must be in 1..={}, got {p}",
            dm.n
        )));
    }
    upgma(dm).cut(p)
}

/// Minimum distance between points of different clusters over the largest
/// cluster diameter. Zero diameters give `+inf`, or `0` when some pair in
/// different clusters also has distance zero.
pub fn dunn_index(dm: &DistanceMatrix, assignments: &[usize]) -> Result<f64> {
    if assignments.len() != dm.n {
        return Err(Error::DimensionMismatch {
            expected: dm.n,
            got: assignments.len(),
        });
    }
    let p = assignments.iter().max().map_or(0, |&k| k + 1);
    if p < 2 {
        return Err(Error::InvalidParameter(
            "the Dunn index needs at least two clusters".into(),
        ));
    }
    let mut sizes = vec![0usize; p];
    for &k in assignments {
        sizes[k] += 1;
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidParameter(
            "cluster labels are not contiguous".into(),
        ));
    }
    let mut inter = f64::INFINITY;
    let mut diameter: f64 = 0.0;
    for i in 0..dm.n {
        for j in i + 1..dm.n {
            let d = dm.get(i, j);
            if assignments[i] == assignments[j] {
                diameter = diameter.max(d);
            } else {
                inter = inter.min(d);
            }
        }
    }
    Ok(if diameter > 0.0 {
        inter / diameter
    } else if inter > 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierFit {
    pub p: usize,
    pub assignments: Vec<usize>,
    /// `(p, Dunn index)` for every candidate.
    pub dunn: Vec<(usize, f64)>,
    /// All pairwise distances are zero.
    pub degenerate: bool,
}

/// Selects the cut maximising the Dunn index; ties go to fewer clusters.
pub fn hier_fit_matrix(dm: &DistanceMatrix, p_grid: &[usize]) -> Result<HierFit> {
    if p_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "cluster-count grid is empty".into(),
        ));
    }
    if let Some(&p) = p_grid.iter().find(|&&p| p < 2 || p > dm.n) {
        return Err(Error::InvalidParameter(format!(
            "cluster count {p} is outside 2..={}",
            dm.n
        )));
    }
    let tree = upgma(dm);
    let mut grid: Vec<usize> = p_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut dunn = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    for &p in &grid {
        let labels = tree.cut(p)?;
        let value = dunn_index(dm, &labels)?;
        dunn.push((p, value));
        if best.as_ref().is_none_or(|b| value > b.1) {
            best = Some((p, value, labels));
        }
    }
    let (p, _, assignments) = best.expect("grid is nonempty");
    Ok(HierFit {
        p,
        assignments,
        dunn,
        degenerate: dm.data.iter().all(|&x| x == 0.0),
    })
}

pub fn hier_fit(set: &SequenceSet, p_grid: &[usize]) -> Result<HierFit> {
    hier_fit_matrix(&distance_matrix(set)?, p_grid)
}
