//! Deeper code-audit scenarios that combine the code machinery with the
//! information-location deciders.

use chanket::codes::{builtin_code, code_channel_ket, security};
use chanket::infoloc::{all_info_absent, hidden_product_factorize, PreProbability};
use chanket::kernels::c;
use chanket::{Config, Operator, SpaceRegistry};
use itertools::Itertools;

fn cfg() -> Config {
    Config::default()
}

#[test]
fn five_qubit_information_recoverable_from_any_three_carriers() {
    // for every stolen pair the state factorizes and the hidden entangled
    // factor still carries the full entrance information
    let code = builtin_code("five_qubit", &cfg()).unwrap();
    let psi = code_channel_ket(&code).unwrap();
    for pair in (1..=5usize).combinations(2) {
        let labels: Vec<String> = pair.iter().map(|m| m.to_string()).collect();
        let stolen: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        let f = hidden_product_factorize(&psi, &["a"], &stolen, &cfg()).unwrap();
        assert!(f.reconstruction_residual < 1e-9, "pair {pair:?}");
        let chi_a = f.chi.dyad().partial_trace(&["a"]).unwrap();
        let half = Operator::identity(SpaceRegistry::single("a", 2).unwrap()).scaled(c(0.5, 0.0));
        assert!(chi_a.distance(&half) < 1e-9, "pair {pair:?}");
    }
}

#[test]
fn five_qubit_pairs_are_uncorrelated_with_entrance() {
    let code = builtin_code("five_qubit", &cfg()).unwrap();
    let psi = code_channel_ket(&code).unwrap();
    let pp = PreProbability::Pure(psi);
    for pair in (1..=5usize).combinations(2) {
        let labels: Vec<String> = pair.iter().map(|m| m.to_string()).collect();
        let stolen: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        let verdict = all_info_absent(&pp, &["a"], &stolen, &cfg()).unwrap();
        assert!(verdict.is_absent(), "pair {pair:?}: {:.3e}", verdict.residual);
    }
}

#[test]
fn security_passes_smaller_subsets_when_larger_ones_pass() {
    // monotonicity: with security 2 established, every singleton must have
    // passed as well, with residuals at the same scale
    let code = builtin_code("five_qubit", &cfg()).unwrap();
    let report = security(&code, 2, &cfg()).unwrap();
    assert_eq!(report.s, 2);
    let singles: Vec<_> = report
        .subsets
        .iter()
        .filter(|check| check.subset.len() == 1)
        .collect();
    assert_eq!(singles.len(), 5);
    assert!(singles.iter().all(|check| check.passes));
}

#[test]
fn trivial_code_has_full_security() {
    let carriers = SpaceRegistry::new(vec![("1", 2), ("2", 2), ("3", 2)]).unwrap();
    let word = chanket::Ket::basis_state(carriers, &[0, 1, 0]).unwrap();
    let code = chanket::codes::CodeSpec::new(&[2, 2, 2], vec![word], &cfg()).unwrap();
    let report = security(&code, 3, &cfg()).unwrap();
    assert_eq!(report.s, 3);
    assert!(report.capped);
}
