use amdc::baseline::hier_fit;
use amdc::cluster::{fit, FitConfig};
use amdc::seqcore::{read_sequences_csv, write_sequences_csv};
use amdc::simbench::{bijective_accuracy, build_scenario, dataset_rng, Overlap, ScenarioKey};
use amdc::stability::stability;

#[test]
fn simulated_state_scenario_round_trips_and_separates() {
    let key = ScenarioKey::state(Overlap::Low);
    let spec = build_scenario(key).unwrap().with_size(60, 150).unwrap();
    let (set, labels) = spec.generate(&mut dataset_rng(11, key, 0)).unwrap();

    let mut csv = Vec::new();
    write_sequences_csv(&set, &mut csv).unwrap();
    let back = read_sequences_csv(csv.as_slice(), Some(set.alphabet().clone())).unwrap();
    assert_eq!(back, set);

    let config = FitConfig {
        p_grid: (2..=5).collect(),
        seed: 4,
        ..FitConfig::default()
    };
    let model = fit(&set, None, &config).unwrap();
    let at_truth = model.best_for_p(2).unwrap();
    assert!(bijective_accuracy(&labels, &at_truth.assignments).unwrap() >= 0.95);

    let hier = hier_fit(&set, &[2, 3, 4, 5]).unwrap();
    assert_eq!(hier.assignments.len(), set.len());

    let report = stability(&set, &model, 10, 4).unwrap();
    assert_eq!(report.scores.len(), set.len());
    assert!(report.scores.iter().all(|s| (0.0..=1.0).contains(s)));
}
