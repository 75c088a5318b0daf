use std::fs;

use sca_core::fixtures::{
    check_drift, committed_path, evaluate_production, generate, read_fixtures, to_csv_string,
    FixtureGrid, Provenance,
};

fn committed() -> (String, Vec<sca_core::fixtures::FixtureRecord>) {
    let text = fs::read_to_string(committed_path()).expect("committed fixture file");
    let records = read_fixtures(text.as_bytes()).unwrap();
    (text, records)
}

#[test]
fn regeneration_reproduces_the_committed_file() {
    let (text, records) = committed();
    let regenerated = generate(&FixtureGrid::default()).unwrap();
    assert!(check_drift(&records, &regenerated).is_empty());
    assert_eq!(to_csv_string(&regenerated).unwrap(), text);
}

#[test]
fn production_code_matches_every_fixture() {
    let (_, records) = committed();
    for r in &records {
        let v = evaluate_production(r).unwrap();
        assert!(
            r.accepts(v),
            "{}: production {v}, fixture {} (tol {})",
            r.id,
            r.expected,
            r.tolerance
        );
    }
}

#[test]
fn every_fixture_names_its_oracle() {
    let (_, records) = committed();
    assert!(!records.is_empty());
    for r in &records {
        match &r.provenance {
            Provenance::Derived(oracle) => assert!(!oracle.is_empty()),
            Provenance::Published | Provenance::Trivial => {}
        }
        assert!(r.tolerance >= 0.0 && r.tolerance.is_finite());
        assert!(!r.description.is_empty(), "{}", r.id);
    }
    let mut ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), records.len(), "duplicate fixture ids");
}

#[test]
fn zero_tolerance_exposes_a_perturbed_value() {
    let (_, mut records) = committed();
    let regenerated = records.clone();
    records[0].expected = f64::from_bits(records[0].expected.to_bits() + 1);
    records[0].tolerance = 0.0;
    assert_eq!(check_drift(&records, &regenerated).len(), 1);
}
