//! Measured behavior of the iterative attack at the published
//! operating point.

use corrlab::config::ExperimentConfig;
use corrlab::harness::run_attack2_exit;

#[test]
fn first_round_strictly_improves_in_majority_of_trials() {
    // k=31 weight-7 polynomial, N=3100, p1=0.2, p2=0: the first round
    // of flips removes errors in most trials, not just on average
    let report = run_attack2_exit(&ExperimentConfig::default()).unwrap();
    let with_rounds: Vec<i64> = report
        .outcomes
        .iter()
        .filter_map(|o| o.first_round_correction)
        .collect();
    assert_eq!(with_rounds.len(), 100, "every trial should run a round");
    let strict = with_rounds.iter().filter(|&&c| c > 0).count();
    assert!(
        strict * 2 > with_rounds.len(),
        "strict first-round improvement in only {strict}/100 trials"
    );
}
