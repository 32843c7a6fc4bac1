use dilation_core::verify::{run_suite, SuiteConfig};
use dilation_core::Execution;

#[test]
fn sequential_and_parallel_reports_agree() {
    let cfg = SuiteConfig {
        trials: Some(6),
        ..SuiteConfig::default()
    };
    for suite in ["lemma10", "corollary5", "chain"] {
        let a = run_suite(suite, &cfg, Execution::Parallel).unwrap();
        let b = run_suite(suite, &cfg, Execution::Sequential).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{suite}");
    }
}

#[test]
fn check_reports_do_not_depend_on_the_seed_for_fixed_constructions() {
    let a = run_suite("prop6", &SuiteConfig { seed: 1, ..SuiteConfig::default() }, Execution::Parallel).unwrap();
    let b = run_suite("prop6", &SuiteConfig { seed: 99, ..SuiteConfig::default() }, Execution::Parallel).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
