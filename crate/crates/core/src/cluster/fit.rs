use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::kmeans::{kmeans, nearest};
use super::metrics::{MetricContext, MetricReport};
use crate::adjacency::{adjacency_matrices, center, AdjacencyMatrix, DataMatrix, WeightVector};
use crate::decomp::{decompose, embed, SvdFactors};
use crate::seqcore::SequenceSet;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Candidate embedding dimensions. `None` means `1..=min(10, rank)`;
    /// explicit values above the rank are dropped.
    pub h_grid: Option<Vec<usize>>,
    pub p_grid: Vec<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            h_grid: None,
            p_grid: (2..=10).collect(),
            restarts: 10,
            seed: 0,
        }
    }
}

/// One evaluated `(h, p)` cell of the selection grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub h: usize,
    pub p: usize,
    pub objective: f64,
    #[serde(flatten)]
    pub report: MetricReport,
    #[serde(skip)]
    pub assignments: Vec<usize>,
}

/// What is needed to place new sequences in a model's embedding:
/// `v = diag(1/s) U^T (t - offset)` for a vectorised adjacency matrix `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub offset: f64,
    pub m: usize,
    pub seq_len: usize,
    pub weights: Option<WeightVector>,
}

impl Projection {
    /// Row-major `n x h` coordinates of every sequence in `set`.
    pub fn project(&self, set: &SequenceSet) -> Result<Vec<f64>> {
        if set.n_states() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: set.n_states(),
            });
        }
        if set.seq_len() != self.seq_len {
            return Err(Error::DimensionMismatch {
                expected: self.seq_len,
                got: set.seq_len(),
            });
        }
        let h = self.s.len();
        let mats = adjacency_matrices(set, self.weights.as_ref())?;
        let mut out = Vec::with_capacity(mats.len() * h);
        for a in &mats {
            let t = DVector::from_iterator(
                a.entries().len(),
                a.entries().iter().map(|x| x - self.offset),
            );
            let coords = self.u.tr_mul(&t);
            out.extend(coords.iter().zip(&self.s).map(|(c, s)| c / s));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub h: usize,
    pub p: usize,
    pub assignments: Vec<usize>,
    /// Row-major `p x h` centers in embedding coordinates.
    pub centers: Vec<f64>,
    pub cluster_means: Vec<AdjacencyMatrix>,
    pub grand_mean: AdjacencyMatrix,
    pub report: MetricReport,
    pub seed: u64,
    pub restarts: usize,
    /// Set when no candidate separates the data (`d_b = 0` everywhere).
    pub degenerate: bool,
    pub grid: Vec<GridEntry>,
    pub projection: Projection,
}

impl ClusterModel {
    /// The best grid entry with exactly `p` clusters.
    pub fn best_for_p(&self, p: usize) -> Option<&GridEntry> {
        self.grid
            .iter()
            .filter(|e| e.p == p)
            .fold(None, |best, e| match best {
                Some(b) if compare(e, b) != Ordering::Greater => Some(b),
                _ => Some(e),
            })
    }

    pub fn project(&self, set: &SequenceSet) -> Result<Vec<f64>> {
        self.projection.project(set)
    }
}

/// Nearest-center assignment of row-major points; ties go to the lowest
/// cluster index.
pub fn assign(model: &ClusterModel, points: &[f64]) -> Result<Vec<usize>> {
    let h = model.h;
    if !points.len().is_multiple_of(h) {
        return Err(Error::DimensionMismatch {
            expected: h,
            got: points.len() % h,
        });
    }
    Ok(points
        .chunks_exact(h)
        .map(|x| nearest(x, &model.centers, h).0)
        .collect())
}

/// Orders grid entries so the preferred one compares greatest: higher `D`
/// (finite below `+inf`, infinite ones by `d_b`), then fewer clusters, then a
/// smaller embedding.
fn compare(a: &GridEntry, b: &GridEntry) -> Ordering {
    fn key(r: &MetricReport) -> (u8, f64) {
        match r.d {
            None => (0, 0.0),
            Some(d) if d.is_infinite() => (2, r.d_b),
            Some(d) => (1, d),
        }
    }
    let (ka, kb) = (key(&a.report), key(&b.report));
    ka.0.cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(b.p.cmp(&a.p))
        .then(b.h.cmp(&a.h))
}

/// Adjacency matrices, the centered data matrix and its SVD: everything the
/// grid search needs, computed once.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub matrices: Vec<AdjacencyMatrix>,
    pub data: DataMatrix,
    pub factors: SvdFactors,
    pub weights: Option<WeightVector>,
}

pub fn prepare(set: &SequenceSet, weights: Option<&WeightVector>) -> Result<Prepared> {
    let matrices = adjacency_matrices(set, weights)?;
    let data = center(DataMatrix::from_matrices(&matrices)?)?;
    let factors = decompose(&data)?;
    Ok(Prepared {
        matrices,
        data,
        factors,
        weights: weights.cloned(),
    })
}

pub fn fit(
    set: &SequenceSet,
    weights: Option<&WeightVector>,
    config: &FitConfig,
) -> Result<ClusterModel> {
    fit_prepared(&prepare(set, weights)?, config)
}

/// Grid search over `(h, p)` on prepared data.
pub fn fit_prepared(prep: &Prepared, config: &FitConfig) -> Result<ClusterModel> {
    let n = prep.matrices.len();
    if config.p_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "cluster-count grid is empty".into(),
        ));
    }
    if let Some(&p) = config.p_grid.iter().find(|&&p| p == 0 || p > n) {
        return Err(Error::InvalidParameter(format!(
            "cluster count {p} is outside 1..={n}"
        )));
    }
    if config.restarts == 0 {
        return Err(Error::InvalidParameter(
            "at least one restart is required".into(),
        ));
    }

    let (mats, dm, factors) = (&prep.matrices, &prep.data, &prep.factors);
    let rank = factors.rank();
    if rank == 0 {
        return Err(Error::Degenerate(
            "all sequences have the same adjacency matrix".into(),
        ));
    }
    let h_grid: Vec<usize> = match &config.h_grid {
        None => (1..=rank.min(10)).collect(),
        Some(g) if g.is_empty() => {
            return Err(Error::InvalidParameter(
                "embedding-dimension grid is empty".into(),
            ))
        }
        Some(g) => g.iter().copied().filter(|&h| h >= 1 && h <= rank).collect(),
    };
    if h_grid.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no embedding dimension in the grid is within 1..={rank}"
        )));
    }

    let full = embed(factors, *h_grid.iter().max().unwrap_or(&1))?;
    let ctx = MetricContext::new(mats)?;
    let cells: Vec<(usize, usize)> = h_grid
        .iter()
        .flat_map(|&h| config.p_grid.iter().map(move |&p| (h, p)))
        .collect();
    let evaluated: Vec<(GridEntry, Vec<f64>)> = cells
        .par_iter()
        .map(|&(h, p)| {
            let points: Vec<f64> = full
                .points
                .row_iter()
                .flat_map(|row| row.columns(0, h).iter().copied().collect::<Vec<_>>())
                .collect();
            let km = kmeans(&points, h, p, config.restarts, config.seed)?;
            let report = ctx.report(&km.assignments)?;
            Ok((
                GridEntry {
                    h,
                    p,
                    objective: km.objective,
                    report,
                    assignments: km.assignments,
                },
                km.centers,
            ))
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for i in 1..evaluated.len() {
        if compare(&evaluated[i].0, &evaluated[best].0) == Ordering::Greater {
            best = i;
        }
    }
    let degenerate = evaluated.iter().all(|(e, _)| e.report.d_b == 0.0);
    let (grid, mut centers): (Vec<GridEntry>, Vec<Vec<f64>>) = evaluated.into_iter().unzip();
    let chosen = grid[best].clone();

    let (_, means) = ctx.cluster_means(&chosen.assignments)?;
    let l = dm.seq_len();
    let weighted = prep.weights.is_some();
    let to_adj = |t: &DMatrix<f64>| {
        AdjacencyMatrix::from_entries(
            t.nrows(),
            t.transpose().iter().copied().collect(),
            l,
            weighted,
        )
    };
    let cluster_means = means.iter().map(to_adj).collect::<Result<Vec<_>>>()?;
    let grand_mean = to_adj(&ctx.grand_mean())?;

    let projection = Projection {
        u: factors.u.columns(0, chosen.h).into_owned(),
        s: factors.s[..chosen.h].to_vec(),
        offset: dm.centering_offset(),
        m: dm.n_states(),
        seq_len: l,
        weights: prep.weights.clone(),
    };

    Ok(ClusterModel {
        h: chosen.h,
        p: chosen.p,
        assignments: chosen.assignments,
        centers: std::mem::take(&mut centers[best]),
        cluster_means,
        grand_mean,
        report: chosen.report,
        seed: config.seed,
        restarts: config.restarts,
        degenerate,
        grid,
        projection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{Alphabet, Sequence};

    fn set_from(alphabet: &str, rows: &[&str]) -> SequenceSet {
        let a = Alphabet::parse(alphabet).unwrap();
        let seqs = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Sequence::new(format!("s{i}"), format!("g{i}"), a.encode(r).unwrap()).unwrap()
            })
            .collect();
        SequenceSet::new(a, seqs).unwrap()
    }

    fn entry(h: usize, p: usize, d: Option<f64>, d_b: f64) -> GridEntry {
        GridEntry {
            h,
            p,
            objective: 0.0,
            report: MetricReport {
                d_w: 1.0,
                d_b,
                d,
                wss: 0.0,
                bss: 0.0,
                d_standard: None,
            },
            assignments: vec![],
        }
    }

    #[test]
    fn selection_order() {
        let inf = Some(f64::INFINITY);
        assert_eq!(
            compare(&entry(1, 2, inf, 1.0), &entry(1, 2, Some(1e9), 5.0)),
            Ordering::Greater
        );
        assert_eq!(
            compare(&entry(1, 3, inf, 2.0), &entry(1, 2, inf, 1.0)),
            Ordering::Greater
        );
        assert_eq!(
            compare(&entry(3, 2, Some(4.0), 1.0), &entry(1, 3, Some(4.0), 1.0)),
            Ordering::Greater
        );
        assert_eq!(
            compare(&entry(1, 2, Some(4.0), 1.0), &entry(2, 2, Some(4.0), 1.0)),
            Ordering::Greater
        );
        assert_eq!(
            compare(&entry(1, 2, Some(0.0), 0.0), &entry(1, 1, None, 0.0)),
            Ordering::Greater
        );
    }

    #[test]
    fn disjoint_states_split_in_two() {
        let rows = [
            "AABBABAB", "ABABBBAA", "AAABBBAB", "BBAABABA", "ABBAABBA", "BABAAABB", "CCDDCDCD",
            "CDCDDDCC", "CCCDDDCD", "DDCCDCDC", "CDDCCDDC", "DCDCCCDD",
        ];
        let set = set_from("ABCD", &rows);
        let config = FitConfig {
            p_grid: (2..=5).collect(),
            ..Default::default()
        };
        let model = fit(&set, None, &config).unwrap();
        assert_eq!(model.p, 2);
        let a = &model.assignments;
        assert!(a[..6].iter().all(|&k| k == a[0]));
        assert!(a[6..].iter().all(|&k| k == a[6]));
        assert_ne!(a[0], a[6]);
        assert!(!model.degenerate);
    }

    #[test]
    fn identical_sequences_are_degenerate() {
        let set = set_from("AB", &["AABB"; 6]);
        let model = fit(
            &set,
            None,
            &FitConfig {
                p_grid: vec![2, 3],
                ..Default::default()
            },
        )
        .unwrap();
        assert!(model.degenerate);
        assert!(model
            .grid
            .iter()
            .all(|e| e.report.d_b == 0.0 && e.report.d == Some(0.0)));
        assert_eq!(model.p, 2);
    }

    #[test]
    fn model_invariants_and_reprojection() {
        let rows = [
            "AAAABBBB", "AAABBBBB", "AAAAABBB", "ABABABAB", "BABABABA", "ABABABBA", "AAAAAAAB",
            "ABBBBBBB", "AABBAABB",
        ];
        let set = set_from("AB", &rows);
        let config = FitConfig {
            p_grid: vec![2, 3],
            restarts: 5,
            seed: 11,
            ..Default::default()
        };
        let model = fit(&set, None, &config).unwrap();
        for k in 0..model.p {
            assert!(model.assignments.contains(&k));
            assert!((model.cluster_means[k].total() - 7.0).abs() < 1e-9);
        }
        let mean_total: f64 = model.grand_mean.total();
        assert!((mean_total - 7.0).abs() < 1e-9);

        let points = model.project(&set).unwrap();
        assert_eq!(assign(&model, &points).unwrap(), model.assignments);

        let again = fit(&set, None, &config).unwrap();
        assert_eq!(
            (again.h, again.p, again.assignments),
            (model.h, model.p, model.assignments.clone())
        );
    }

    #[test]
    fn assign_ties_go_low() {
        let set = set_from("AB", &["AABB", "ABAB", "BBAA", "ABBA"]);
        let mut model = fit(
            &set,
            None,
            &FitConfig {
                p_grid: vec![2],
                ..Default::default()
            },
        )
        .unwrap();
        model.h = 1;
        model.centers = vec![-1.0, 1.0];
        assert_eq!(assign(&model, &[0.0, 1.0, -1.0]).unwrap(), vec![0, 1, 0]);
        assert!(assign(&model, &[]).unwrap().is_empty());
    }
}
