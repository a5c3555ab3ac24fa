use amdc::adjacency::{
    adjacency_matrices, assemble, build_adjacency, build_weighted_adjacency, center, WeightVector,
};
use amdc::cluster::{assign, fit, metric_d, FitConfig};
use amdc::decomp::{contributions, decompose};
use amdc::seqcore::{Alphabet, Sequence, SequenceSet};
use amdc::simbench::bijective_accuracy;
use proptest::prelude::*;

fn arb_set(m: u8, max_n: usize, max_l: usize) -> impl Strategy<Value = SequenceSet> {
    (2usize..=max_l).prop_flat_map(move |l| {
        proptest::collection::vec(proptest::collection::vec(0..m, l), 2..=max_n).prop_map(
            move |rows| {
                let alphabet = Alphabet::new((0..m).map(|k| format!("s{k}"))).unwrap();
                let seqs = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| Sequence::new(format!("x{i}"), "g", s).unwrap())
                    .collect();
                SequenceSet::new(alphabet, seqs).unwrap()
            },
        )
    })
}

fn arb_partition(n: usize, p: usize) -> impl Strategy<Value = Vec<usize>> {
    // Every label in 0..p appears at least once.
    proptest::collection::vec(0..p, n).prop_map(move |mut labels| {
        for k in 0..p.min(labels.len()) {
            labels[k] = k;
        }
        labels
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_matrices_keep_total_mass(
        states in proptest::collection::vec(0u8..4, 2..200),
        raw in proptest::collection::vec(0.1f64..5.0, 199),
    ) {
        let l = states.len();
        let seq = Sequence::new("a", "g", states).unwrap();
        let w = WeightVector::new(raw[..l - 1].to_vec()).unwrap();
        let a = build_weighted_adjacency(&seq, 4, &w).unwrap();
        prop_assert!((a.total() - (l - 1) as f64).abs() <= 1e-9);
        prop_assert!(a.entries().iter().all(|&x| x >= 0.0));
        let plain = build_adjacency(&seq, 4);
        let uniform = build_weighted_adjacency(&seq, 4, &WeightVector::uniform(l)).unwrap();
        prop_assert_eq!(plain.entries(), uniform.entries());
    }

    #[test]
    fn sums_of_squares_decompose(set in arb_set(3, 12, 30), seed in any::<u64>()) {
        let n = set.len();
        let p = 2.min(n);
        let labels: Vec<usize> = (0..n).map(|i| ((i as u64 ^ seed) % p as u64) as usize).collect();
        let labels = if labels.iter().all(|&k| k == labels[0]) {
            (0..n).map(|i| usize::from(i == 0)).collect()
        } else {
            labels
        };
        let mats = adjacency_matrices(&set, None).unwrap();
        let r = metric_d(&mats, &labels).unwrap();
        let dim = set.n_states() * set.n_states();
        let mut grand = vec![0.0; dim];
        for a in &mats {
            for (g, x) in grand.iter_mut().zip(a.entries()) {
                *g += x / n as f64;
            }
        }
        let tss: f64 = mats
            .iter()
            .flat_map(|a| a.entries().iter().zip(&grand).map(|(x, g)| (x - g).powi(2)))
            .sum();
        prop_assert!((r.wss + r.bss - tss).abs() <= 1e-8 * tss.max(1.0));
        prop_assert!(r.d_w >= 0.0 && r.d_b >= 0.0);
    }

    #[test]
    fn metrics_ignore_label_names(set in arb_set(3, 10, 25), labels in arb_partition(10, 3)) {
        let n = set.len();
        let labels: Vec<usize> = labels[..n].to_vec();
        let mut used: Vec<usize> = labels.clone();
        used.sort_unstable();
        used.dedup();
        let dense: Vec<usize> = labels.iter().map(|k| used.binary_search(k).unwrap()).collect();
        let flipped: Vec<usize> = dense.iter().map(|k| used.len() - 1 - k).collect();
        let mats = adjacency_matrices(&set, None).unwrap();
        let a = metric_d(&mats, &dense).unwrap();
        let b = metric_d(&mats, &flipped).unwrap();
        prop_assert!((a.d_w - b.d_w).abs() <= 1e-9 * a.d_w.max(1.0));
        prop_assert!((a.d_b - b.d_b).abs() <= 1e-9 * a.d_b.max(1.0));
        prop_assert!((a.wss - b.wss).abs() <= 1e-9 * a.wss.max(1.0));
    }

    #[test]
    fn contribution_columns_sum_to_hundred(set in arb_set(3, 15, 40)) {
        let data = center(assemble(&set, None).unwrap()).unwrap();
        let f = decompose(&data).unwrap();
        let c = contributions(&data, &f).unwrap();
        for col in c.values.column_iter() {
            prop_assert!((col.sum() - 100.0).abs() <= 1e-6);
        }
    }
}

fn blocks(n_per: usize, l: usize) -> SequenceSet {
    // Two groups living on disjoint pairs of states.
    let alphabet = Alphabet::parse("ABCD").unwrap();
    let mut seqs = Vec::new();
    for g in 0..2u8 {
        for i in 0..n_per {
            let states = (0..l)
                .map(|j| 2 * g + u8::from((j / (3 + i % 5)) % 2 == 1))
                .collect();
            seqs.push(Sequence::new(format!("g{g}_{i}"), format!("g{g}"), states).unwrap());
        }
    }
    SequenceSet::new(alphabet, seqs).unwrap()
}

#[test]
fn fitted_model_reassigns_its_own_data() {
    let set = blocks(15, 60);
    let config = FitConfig {
        p_grid: (2..=4).collect(),
        ..FitConfig::default()
    };
    let model = fit(&set, None, &config).unwrap();
    let truth: Vec<usize> = (0..30).map(|i| i / 15).collect();
    let at_two = model.best_for_p(2).unwrap();
    assert_eq!(
        bijective_accuracy(&truth, &at_two.assignments).unwrap(),
        1.0
    );
    let again = assign(&model, &model.project(&set).unwrap()).unwrap();
    assert_eq!(again, model.assignments);
}
