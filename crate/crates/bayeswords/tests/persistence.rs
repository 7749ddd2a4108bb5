//! Saved models: exact round trips and refusal of damaged or foreign files.

use std::fs;

use bayeswords::config::{ClassifierKind, Config};
use bayeswords::error::Error;
use bayeswords::persist::{load_model, save_model};
use bayeswords::pipeline::{run, Model};
use bayeswords_core::synth::generate_synthetic;

fn trained(kind: ClassifierKind) -> Model {
    let cfg = Config {
        classifier: kind,
        seed: 5,
        restarts: 1,
        em_max_iters: 15,
        ..Config::default()
    };
    run(generate_synthetic(3, 12, 0.9, 5).unwrap(), &cfg)
        .unwrap()
        .model
}

fn root_cause(e: &Error) -> &Error {
    match e {
        Error::Stage { inner, .. } => root_cause(inner),
        other => other,
    }
}

#[test]
fn every_kind_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [
        ClassifierKind::Nb,
        ClassifierKind::Tan,
        ClassifierKind::Fan,
        ClassifierKind::Dbn,
    ] {
        let model = trained(kind);
        let path = dir.path().join(kind.as_str());
        save_model(&model, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model, "{kind}");
    }
}

#[test]
fn truncated_static_model_fails_the_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m");
    save_model(&trained(ClassifierKind::Fan), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    for cut in [text.len() - 1, text.len() - 80, text.len() / 2] {
        fs::write(&path, &text[..cut]).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(
            matches!(root_cause(&err), Error::Checksum { .. }),
            "cut {cut}: {err}"
        );
        assert!(err.to_string().starts_with("[persist]"));
    }
}

#[test]
fn damaged_coupled_model_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dbn");
    save_model(&trained(ClassifierKind::Dbn), &path).unwrap();
    let class = path.join("class-002.chmm");
    let text = fs::read_to_string(&class).unwrap();
    fs::write(&class, text.replacen("pi ", "pi 0.5 ", 1)).unwrap();
    assert!(matches!(
        root_cause(&load_model(&path).unwrap_err()),
        Error::Checksum { .. }
    ));
}

#[test]
fn older_version_is_refused_explicitly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m");
    save_model(&trained(ClassifierKind::Nb), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replacen(" v1\n", " v0\n", 1)).unwrap();
    let err = load_model(&path).unwrap_err();
    match root_cause(&err) {
        Error::Version {
            found, expected, ..
        } => assert_eq!((found.as_str(), *expected), ("v0", 1)),
        other => panic!("expected a version error, got {other}"),
    }
}
