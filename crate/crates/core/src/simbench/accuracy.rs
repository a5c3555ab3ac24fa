use std::collections::HashMap;

use crate::{Error, Result};

/// Largest cluster count handled by the exact matching.
pub const MAX_MATCHED_CLUSTERS: usize = 16;

fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut seen = HashMap::new();
    let out = labels
        .iter()
        .map(|&x| {
            let next = seen.len();
            *seen.entry(x).or_insert(next)
        })
        .collect();
    (out, seen.len())
}

/// Fraction of observations that agree with the truth under the best
/// one-to-one matching of predicted to true clusters. Both labelings must
/// use the same number of distinct clusters.
pub fn bijective_accuracy(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset(": no labels to compare".into()));
    }
    let (t, pt) = relabel(truth);
    let (p, pp) = relabel(predicted);
    if pt != pp {
        return Err(Error::ClusterCountMismatch {
            truth: pt,
            predicted: pp,
        });
    }
    if pt > MAX_MATCHED_CLUSTERS {
        return Err(Error::InvalidParameter(format!(
            "exact matching supports at most {MAX_MATCHED_CLUSTERS} clusters, got {pt}"
        )));
    }
    let k = pt;
    let mut confusion = vec![0usize; k * k];
    for (&a, &b) in t.iter().zip(&p) {
        confusion[a * k + b] += 1;
    }
    // best[mask]: best agreement matching the first popcount(mask) true
    // clusters to the predicted clusters in `mask`.
    let mut best = vec![0usize; 1 << k];
    for mask in 1usize..(1 << k) {
        let row = mask.count_ones() as usize - 1;
        let mut value = 0;
        let mut bits = mask;
        while bits != 0 {
            let col = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            value = value.max(best[mask & !(1 << col)] + confusion[row * k + col]);
        }
        best[mask] = value;
    }
    Ok(best[(1 << k) - 1] as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for perm in permutations(k - 1) {
            for pos in 0..=perm.len() {
                let mut p = perm.clone();
                p.insert(pos, k - 1);
                out.push(p);
            }
        }
        out
    }

    fn brute_force(truth: &[usize], predicted: &[usize], k: usize) -> f64 {
        permutations(k)
            .iter()
            .map(|perm| {
                truth
                    .iter()
                    .zip(predicted)
                    .filter(|(&t, &p)| perm[p] == t)
                    .count()
            })
            .max()
            .unwrap() as f64
            / truth.len() as f64
    }

    #[test]
    fn small_examples() {
        assert_eq!(
            bijective_accuracy(&[1, 1, 2, 2], &[2, 2, 1, 1]).unwrap(),
            1.0
        );
        assert_eq!(
            bijective_accuracy(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap(),
            0.5
        );
        assert!(matches!(
            bijective_accuracy(&[0, 1, 2], &[0, 0, 1]),
            Err(Error::ClusterCountMismatch {
                truth: 3,
                predicted: 2
            })
        ));
    }

    #[test]
    fn matches_permutation_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in [2, 3, 4, 6] {
            for _ in 0..20 {
                let truth: Vec<usize> = (0..60).map(|i| i % k).collect();
                let mut pred: Vec<usize> = (0..60).map(|_| rng.random_range(0..k)).collect();
                pred[..k].copy_from_slice(&(0..k).collect::<Vec<_>>());
                let fast = bijective_accuracy(&truth, &pred).unwrap();
                assert_eq!(fast, brute_force(&truth, &pred, k));
                let shuffled: Vec<usize> = pred.iter().map(|&x| (x + 1) % k).collect();
                assert_eq!(fast, bijective_accuracy(&truth, &shuffled).unwrap());
            }
        }
    }
}
