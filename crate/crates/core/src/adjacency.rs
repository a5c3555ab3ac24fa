//! Transition-count (adjacency) matrices and the stacked data matrix.
//!
//! Entry `(u, v)` of a sequence's adjacency matrix counts positions `j` with
//! `y[j] = u` and `y[j+1] = v`, so the entries sum to `l - 1`. Matrices are
//! vectorised in row-major order: entry `(u, v)` lands at `u * m + v`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::seqcore::{Sequence, SequenceSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    m: usize,
    entries: Vec<f64>,
    seq_len: usize,
    weighted: bool,
}

impl AdjacencyMatrix {
    /// Builds a matrix directly from row-major entries.
    pub fn from_entries(
        m: usize,
        entries: Vec<f64>,
        seq_len: usize,
        weighted: bool,
    ) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                got: entries.len(),
            });
        }
        Ok(Self {
            m,
            entries,
            seq_len,
            weighted,
        })
    }

    pub fn n_states(&self) -> usize {
        self.m
    }

    /// Length of the sequence the matrix was built from.
    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.m + to]
    }

    /// Row-major entries; this is the vectorised form.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries
            .chunks(self.m)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.m, &self.entries)
    }

    /// Rows scaled to sum to one: the empirical first-order transition
    /// matrix. Rows with no outgoing transitions stay zero.
    pub fn transition_probabilities(&self) -> Vec<f64> {
        let mut out = self.entries.clone();
        for row in out.chunks_mut(self.m) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        out
    }
}

pub fn build_adjacency(seq: &Sequence, m: usize) -> AdjacencyMatrix {
    let states = seq.states();
    let mut counts = vec![0u32; m * m];
    for pair in states.windows(2) {
        counts[pair[0] as usize * m + pair[1] as usize] += 1;
    }
    AdjacencyMatrix {
        m,
        entries: counts.into_iter().map(f64::from).collect(),
        seq_len: states.len(),
        weighted: false,
    }
}

/// Per-transition weights; `w[j]` applies to the transition from position
/// `j` to `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("weight vector is empty".into()));
        }
        if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "weights must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { w })
    }

    pub fn uniform(seq_len: usize) -> Self {
        Self {
            w: vec![1.0; seq_len.saturating_sub(1)],
        }
    }

    /// Weights from clock windows. A transition is weighted by the last
    /// window containing the start time of its source position; sequences
    /// longer than a day repeat the windows every day.
    pub fn from_windows(
        windows: &[WeightWindow],
        seq_len: usize,
        quantum_minutes: u32,
    ) -> Result<Self> {
        if quantum_minutes == 0 || 1440 % quantum_minutes != 0 {
            return Err(Error::InvalidParameter(format!(
                "quantum of {quantum_minutes} min does not divide a day"
            )));
        }
        let per_day = (1440 / quantum_minutes) as usize;
        let w = (0..seq_len.saturating_sub(1))
            .map(|j| {
                let minute = ((j % per_day) as u32) * quantum_minutes;
                windows
                    .iter()
                    .rev()
                    .find(|win| win.contains(minute))
                    .map_or(1.0, |win| win.relative_weight)
            })
            .collect();
        Self::new(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    fn is_uniform(&self) -> bool {
        self.w.iter().all(|&x| x == self.w[0])
    }
}

/// A clock-time window `[start, end)` with a relative transition weight.
/// Windows with `end <= start` wrap around midnight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightWindow {
    pub start_minute: u32,
    pub end_minute: u32,
    pub relative_weight: f64,
}

impl WeightWindow {
    /// Parses `"HH:MM-HH:MM"`.
    pub fn parse(window: &str, relative_weight: f64) -> Result<Self> {
        let bad = || Error::Parse(format!("window `{window}` is not HH:MM-HH:MM"));
        let (a, b) = window.split_once('-').ok_or_else(bad)?;
        let minute = |s: &str| -> Result<u32> {
            let (h, m) = s.trim().split_once(':').ok_or_else(bad)?;
            let h: u32 = h.parse().map_err(|_| bad())?;
            let m: u32 = m.parse().map_err(|_| bad())?;
            if h > 24 || m > 59 || (h == 24 && m != 0) {
                return Err(bad());
            }
            Ok(h * 60 + m)
        };
        if !(relative_weight.is_finite() && relative_weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "relative weight must be positive, got {relative_weight}"
            )));
        }
        Ok(Self {
            start_minute: minute(a)?,
            end_minute: minute(b)?,
            relative_weight,
        })
    }

    fn contains(&self, minute: u32) -> bool {
        if self.start_minute < self.end_minute {
            (self.start_minute..self.end_minute).contains(&minute)
        } else {
            minute >= self.start_minute || minute < self.end_minute
        }
    }
}

/// Weighted transition counts, rescaled so the entries again sum to `l - 1`.
pub fn build_weighted_adjacency(
    seq: &Sequence,
    m: usize,
    w: &WeightVector,
) -> Result<AdjacencyMatrix> {
    let states = seq.states();
    if w.len() + 1 != states.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len() - 1,
            got: w.len(),
        });
    }
    if w.is_uniform() {
        // The rescale cancels a constant weight exactly.
        let mut a = build_adjacency(seq, m);
        a.weighted = true;
        return Ok(a);
    }
    let mut raw = vec![0.0f64; m * m];
    for (pair, &wj) in states.windows(2).zip(w.as_slice()) {
        raw[pair[0] as usize * m + pair[1] as usize] += wj;
    }
    let total: f64 = raw.iter().sum();
    let scale = (states.len() - 1) as f64 / total;
    raw.iter_mut().for_each(|x| *x *= scale);
    Ok(AdjacencyMatrix {
        m,
        entries: raw,
        seq_len: states.len(),
        weighted: true,
    })
}

/// Adjacency matrices for every sequence in the set, in set order.
pub fn adjacency_matrices(
    set: &SequenceSet,
    weights: Option<&WeightVector>,
) -> Result<Vec<AdjacencyMatrix>> {
    let m = set.n_states();
    set.sequences()
        .par_iter()
        .map(|s| match weights {
            Some(w) => build_weighted_adjacency(s, m, w),
            None => Ok(build_adjacency(s, m)),
        })
        .collect()
}

/// The `m^2 x n` matrix whose columns are vectorised adjacency matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    matrix: DMatrix<f64>,
    centered: bool,
    seq_len: usize,
    m: usize,
}

impl DataMatrix {
    pub fn from_matrices(mats: &[AdjacencyMatrix]) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::EmptyDataset(": no adjacency matrices".into()))?;
        let (m, seq_len) = (first.m, first.seq_len);
        let mut matrix = DMatrix::zeros(m * m, mats.len());
        for (i, a) in mats.iter().enumerate() {
            if a.m != m || a.seq_len != seq_len {
                return Err(Error::DimensionMismatch {
                    expected: m * m,
                    got: a.m * a.m,
                });
            }
            matrix.column_mut(i).copy_from_slice(&a.entries);
        }
        Ok(Self {
            matrix,
            centered: false,
            seq_len,
            m,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn n_states(&self) -> usize {
        self.m
    }

    pub fn n_sequences(&self) -> usize {
        self.matrix.ncols()
    }

    /// The constant `(l - 1) / m^2` removed by [`center`].
    pub fn centering_offset(&self) -> f64 {
        (self.seq_len - 1) as f64 / (self.m * self.m) as f64
    }

    /// Reverses the vectorisation of column `i`. On a centered matrix the
    /// offset is added back.
    pub fn column_matrix(&self, i: usize) -> AdjacencyMatrix {
        let offset = if self.centered {
            self.centering_offset()
        } else {
            0.0
        };
        AdjacencyMatrix {
            m: self.m,
            entries: self.matrix.column(i).iter().map(|x| x + offset).collect(),
            seq_len: self.seq_len,
            weighted: false,
        }
    }
}

/// Stacks the (optionally weighted) adjacency matrices of `set` as columns.
pub fn assemble(set: &SequenceSet, weights: Option<&WeightVector>) -> Result<DataMatrix> {
    DataMatrix::from_matrices(&adjacency_matrices(set, weights)?)
}

/// Subtracts `(l - 1) / m^2` from every entry, which makes every column sum
/// to zero.
pub fn center(dm: DataMatrix) -> Result<DataMatrix> {
    if dm.centered {
        return Err(Error::AlreadyCentered);
    }
    let offset = dm.centering_offset();
    let DataMatrix {
        mut matrix,
        seq_len,
        m,
        ..
    } = dm;
    matrix.iter_mut().for_each(|x| *x -= offset);
    Ok(DataMatrix {
        matrix,
        centered: true,
        seq_len,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::Alphabet;
    use proptest::prelude::*;

    fn seq(alpha: &Alphabet, s: &str) -> Sequence {
        Sequence::new(s, "", alpha.encode(s).unwrap()).unwrap()
    }

    #[test]
    fn hand_counted_matrix() {
        let a = Alphabet::parse("HWTO").unwrap();
        let t = build_adjacency(&seq(&a, "HHWWH"), 4);
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(0, 1), 1.0);
        assert_eq!(t.get(1, 1), 1.0);
        assert_eq!(t.get(1, 0), 1.0);
        assert_eq!(t.total(), 4.0);
        assert_eq!(t.entries().iter().filter(|&&x| x != 0.0).count(), 4);
    }

    #[test]
    fn constant_and_alternating_sequences() {
        let a = Alphabet::parse("AB").unwrap();
        let t = build_adjacency(&seq(&a, "AAAAAAA"), 2);
        assert_eq!(t.entries(), &[6.0, 0.0, 0.0, 0.0]);
        let t = build_adjacency(&seq(&a, "ABABAB"), 2);
        assert_eq!(t.entries(), &[0.0, 3.0, 2.0, 0.0]);
    }

    #[test]
    fn weighted_example_rescales_to_l_minus_one() {
        let a = Alphabet::parse("AB").unwrap();
        let w = WeightVector::new(vec![1.0, 2.0, 1.0]).unwrap();
        let t = build_weighted_adjacency(&seq(&a, "AABB"), 2, &w).unwrap();
        assert_eq!(t.entries(), &[0.75, 1.5, 0.0, 0.75]);
        assert_eq!(t.total(), 3.0);
    }

    #[test]
    fn weight_length_must_match() {
        let a = Alphabet::parse("AB").unwrap();
        let w = WeightVector::new(vec![1.0, 2.0]).unwrap();
        assert!(build_weighted_adjacency(&seq(&a, "AABB"), 2, &w).is_err());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn nine_to_five_window_covers_positions_108_to_203() {
        let win = WeightWindow::parse("09:00-17:00", 2.0).unwrap();
        let w = WeightVector::from_windows(&[win], 288, 5).unwrap();
        assert_eq!(w.len(), 287);
        for (j, &x) in w.as_slice().iter().enumerate() {
            let expected = if (108..204).contains(&j) { 2.0 } else { 1.0 };
            assert_eq!(x, expected, "position {j}");
        }
        // Week sequences repeat the window every day.
        let w = WeightVector::from_windows(&[win], 1440, 5).unwrap();
        assert_eq!(w.as_slice()[288 + 108], 2.0);
        assert_eq!(w.as_slice()[288 + 107], 1.0);
    }

    #[test]
    fn window_parsing() {
        assert!(WeightWindow::parse("9-17", 2.0).is_err());
        assert!(WeightWindow::parse("09:00-17:00", -1.0).is_err());
        let night = WeightWindow::parse("22:00-06:00", 1.5).unwrap();
        assert!(night.contains(23 * 60) && night.contains(60) && !night.contains(12 * 60));
    }

    #[test]
    fn assemble_uses_row_major_vectorisation() {
        let a = Alphabet::parse("HWTO").unwrap();
        let set = SequenceSet::new(a.clone(), vec![seq(&a, "HHWWH")]).unwrap();
        let dm = assemble(&set, None).unwrap();
        let col: Vec<f64> = dm.matrix().column(0).iter().copied().collect();
        let expected = [
            1., 1., 0., 0., 1., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.,
        ];
        assert_eq!(col, expected);
        assert_eq!(dm.column_matrix(0), build_adjacency(&set.sequences()[0], 4));
    }

    #[test]
    fn centering_subtracts_constant_once() {
        let a = Alphabet::parse("HWTO").unwrap();
        let set = SequenceSet::new(a.clone(), vec![seq(&a, "HHWWH"), seq(&a, "TTOOH")]).unwrap();
        let dm = assemble(&set, None).unwrap();
        assert_eq!(dm.centering_offset(), 0.25);
        let c = center(dm.clone()).unwrap();
        assert_eq!(c.matrix()[(0, 0)], 0.75);
        assert_eq!(c.matrix()[(15, 0)], -0.25);
        assert_eq!(c.matrix()[(15, 1)], 0.75);
        for col in c.matrix().column_iter() {
            assert!(col.sum().abs() < 1e-12);
        }
        assert!(matches!(center(c.clone()), Err(Error::AlreadyCentered)));
        assert_eq!(c.column_matrix(1).entries(), dm.column_matrix(1).entries());

        let day = SequenceSet::new(
            a.clone(),
            vec![Sequence::new("d", "", vec![0; 288]).unwrap()],
        )
        .unwrap();
        assert_eq!(assemble(&day, None).unwrap().centering_offset(), 17.9375);
    }

    fn arb_seq(m: u8, max_len: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0..m, 2..max_len)
    }

    proptest! {
        #[test]
        fn sums_and_occupancy(states in arb_seq(5, 300)) {
            let s = Sequence::new("x", "", states.clone()).unwrap();
            let t = build_adjacency(&s, 5);
            prop_assert_eq!(t.total(), (states.len() - 1) as f64);
            let mut occupancy = vec![0.0; 5];
            for &x in &states[..states.len() - 1] {
                occupancy[x as usize] += 1.0;
            }
            prop_assert_eq!(t.row_sums(), occupancy);
            let p = t.transition_probabilities();
            for row in p.chunks(5) {
                let sum: f64 = row.iter().sum();
                prop_assert!(sum == 0.0 || (sum - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn weight_scale_invariance(
            states in arb_seq(4, 120),
            seed in prop::collection::vec(0.1f64..5.0, 120),
            c in 0.01f64..100.0,
        ) {
            let s = Sequence::new("x", "", states.clone()).unwrap();
            let w: Vec<f64> = seed[..states.len() - 1].to_vec();
            let a = build_weighted_adjacency(&s, 4, &WeightVector::new(w.clone()).unwrap()).unwrap();
            let scaled = WeightVector::new(w.iter().map(|x| x * c).collect()).unwrap();
            let b = build_weighted_adjacency(&s, 4, &scaled).unwrap();
            prop_assert!((a.total() - (states.len() - 1) as f64).abs() < 1e-9);
            for (x, y) in a.entries().iter().zip(b.entries()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
