//! The command-line tool driven as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

fn bayeswords(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayeswords"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = bayeswords(args, dir);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn full_workflow() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("exp.cfg"),
        "seed = 3\nrestarts = 1\nem_max_iters = 10\n",
    )
    .unwrap();
    ok(
        &[
            "synth",
            "--classes",
            "3",
            "--per-class",
            "12",
            "--out",
            "data",
            "--config",
            "exp.cfg",
        ],
        dir,
    );
    ok(
        &[
            "split",
            "data/manifest.tsv",
            "--out",
            "split",
            "--config",
            "exp.cfg",
        ],
        dir,
    );
    let manifest = std::fs::read_to_string(dir.join("split/manifest.tsv")).unwrap();
    assert_eq!(
        manifest.lines().filter(|l| l.ends_with("\ttest")).count(),
        9
    );

    ok(&["features", "split/manifest.tsv", "--out", "feat"], dir);
    let dump = std::fs::read_to_string(dir.join("feat/features.csv")).unwrap();
    assert_eq!(dump.lines().count(), 36 * 3);
    ok(
        &[
            "codebook",
            "split/manifest.tsv",
            "--out",
            "cb",
            "--codebook-k",
            "6",
        ],
        dir,
    );
    assert!(dir.join("cb/block-3.codebook").exists());

    ok(
        &[
            "train-static",
            "split/manifest.tsv",
            "--classifier",
            "nb",
            "--out",
            "nb",
            "--config",
            "exp.cfg",
        ],
        dir,
    );
    let table = ok(
        &[
            "evaluate",
            "nb/model.static",
            "split/manifest.tsv",
            "--out",
            "nb",
        ],
        dir,
    );
    assert!(table.contains("T_m ="), "{table}");
    assert_eq!(ok(&["report", "nb/report.json"], dir), table);

    ok(
        &[
            "train-dbn",
            "split/manifest.tsv",
            "--q-range",
            "2..3",
            "--out",
            "dbn",
            "--config",
            "exp.cfg",
        ],
        dir,
    );
    assert!(std::fs::read_to_string(dir.join("dbn/state-curves.txt"))
        .unwrap()
        .starts_with("# class q rate cost"));
    let image = manifest
        .lines()
        .next()
        .unwrap()
        .split('\t')
        .next()
        .unwrap()
        .to_string();
    let prediction = ok(&["predict", "dbn/model.dbn", &image], dir);
    assert_eq!(prediction.trim_end().split('\t').count(), 1 + 3);
}

#[test]
fn failures_exit_nonzero_with_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bayeswords(&["train-static", "missing.tsv"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[load]"));
    let out = bayeswords(
        &["train-static", "missing.tsv", "--q-range", "4..2"],
        tmp.path(),
    );
    assert!(!out.status.success());
    let out = bayeswords(
        &["train-static", "x.tsv", "--classifier", "dbn"],
        tmp.path(),
    );
    assert!(!out.status.success());
}
