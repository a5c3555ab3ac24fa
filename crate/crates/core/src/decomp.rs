//! Thin SVD of the centered data matrix, the embedding drawn from its right
//! singular vectors, and the per-entry contribution diagnostic.

use nalgebra::DMatrix;

use crate::adjacency::DataMatrix;
use crate::seqcore::Alphabet;
use crate::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Largest accepted `||A - U S V^T||_F / ||A||_F`.
const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Thin SVD `A = U diag(S) V^T` with `r = min(rows, cols)` columns, singular
/// values sorted in descending order.
///
/// Each pair `(u_k, v_k)` is oriented so that the entry of `u_k` with the
/// largest magnitude is positive (lowest index on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        let Some(&top) = self.s.first() else { return 0 };
        if top == 0.0 {
            return 0;
        }
        self.s
            .iter()
            .take_while(|&&x| x > top * RANK_TOLERANCE)
            .count()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (k, mut col) in us.column_iter_mut().enumerate() {
            col *= self.s[k];
        }
        us * self.v.transpose()
    }
}

/// SVD of an arbitrary dense matrix.
pub fn svd(a: &DMatrix<f64>) -> Result<SvdFactors> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Numerical("matrix has no entries".into()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(
            "matrix contains non-finite entries".into(),
        ));
    }
    let (u_raw, s_raw, v_raw) = raw_svd(a).ok_or_else(|| {
        Error::Numerical(format!(
            "SVD did not reach an accurate factorisation of a {rows}x{cols} matrix with Frobenius norm {:.3e}",
            a.norm()
        ))
    })?;
    let r = s_raw.len();

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| s_raw[j].total_cmp(&s_raw[i]).then(i.cmp(&j)));

    let mut u = DMatrix::zeros(rows, r);
    let mut v = DMatrix::zeros(cols, r);
    let mut s = Vec::with_capacity(r);
    for (k, &src) in order.iter().enumerate() {
        let uk = u_raw.column(src);
        let mut best = 0;
        for i in 1..rows {
            if uk[i].abs() > uk[best].abs() {
                best = i;
            }
        }
        let sign = if uk[best] < 0.0 { -1.0 } else { 1.0 };
        u.set_column(k, &(uk * sign));
        v.set_column(k, &(v_raw.column(src) * sign));
        s.push(s_raw[src]);
    }
    Ok(SvdFactors { u, s, v })
}

/// Unordered `(U, S, V)` from faer, or `None` when the iteration fails or
/// its result does not reproduce `a`.
fn raw_svd(a: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (rows, cols) = a.shape();
    let dec = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)])
        .thin_svd()
        .ok()?;
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    let r = fs.nrows();
    let u = DMatrix::from_fn(rows, r, |i, k| fu[(i, k)]);
    let v = DMatrix::from_fn(cols, r, |j, k| fv[(j, k)]);
    let s: Vec<f64> = (0..r).map(|k| fs[k]).collect();
    let mut us = u.clone();
    for (k, mut col) in us.column_iter_mut().enumerate() {
        col *= s[k];
    }
    let residual = (a - us * v.transpose()).norm();
    (residual <= RESIDUAL_TOLERANCE * a.norm()).then_some((u, s, v))
}

/// Decomposes a centered data matrix.
pub fn decompose(dm: &DataMatrix) -> Result<SvdFactors> {
    if !dm.is_centered() {
        return Err(Error::NotCentered);
    }
    svd(dm.matrix())
}

/// Sequence coordinates: the first `h` columns of `V`, one row per sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: DMatrix<f64>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn n_points(&self) -> usize {
        self.points.nrows()
    }

    /// Row-major copy of the points, convenient for clustering.
    pub fn rows(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        for row in self.points.row_iter() {
            out.extend(row.iter());
        }
        out
    }
}

pub fn embed(f: &SvdFactors, h: usize) -> Result<Embedding> {
    let r = f.s.len();
    if h == 0 || h > r {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension must be in 1..={r}, got {h}"
        )));
    }
    Ok(Embedding {
        points: f.v.columns(0, h).into_owned(),
    })
}

/// Percent contribution of each adjacency entry (row) to each singular
/// direction (column). Directions with a zero singular value are omitted, so
/// the matrix has `rank` columns, each summing to 100.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionMatrix {
    pub values: DMatrix<f64>,
}

impl ContributionMatrix {
    /// Row labels `from→to` in vectorisation order.
    pub fn row_labels(alphabet: &Alphabet) -> Vec<String> {
        let s = alphabet.symbols();
        s.iter()
            .flat_map(|from| s.iter().map(move |to| format!("{from}→{to}")))
            .collect()
    }
}

/// `C = (M_c V)^2 * 100 / S^2`, elementwise, for every nonzero singular value.
pub fn contributions(dm: &DataMatrix, f: &SvdFactors) -> Result<ContributionMatrix> {
    if !dm.is_centered() {
        return Err(Error::NotCentered);
    }
    let mc = dm.matrix();
    if mc.nrows() != f.u.nrows() || mc.ncols() != f.v.nrows() {
        return Err(Error::DimensionMismatch {
            expected: mc.ncols(),
            got: f.v.nrows(),
        });
    }
    let rank = f.rank();
    let projected = mc * f.v.columns(0, rank);
    let mut values = projected.map(|x| x * x);
    for (k, mut col) in values.column_iter_mut().enumerate() {
        col *= 100.0 / (f.s[k] * f.s[k]);
    }
    Ok(ContributionMatrix { values })
}
