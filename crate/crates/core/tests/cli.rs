//! End to end checks of the command line binary: exit codes, output
//! determinism, canonical round trips, and a pinned table rendering.

use std::process::{Command, Output};

fn wittcycle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wittcycle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

#[test]
fn exit_codes_separate_failure_from_error() {
    let equal = wittcycle(&["form", "witt-equal", "<1>", "<1, t, -t>"]);
    assert_eq!(equal.status.code(), Some(0), "split padding is equivalent");

    let inequal = wittcycle(&["form", "witt-equal", "<1>", "<t>"]);
    assert_eq!(inequal.status.code(), Some(1), "distinct classes fail");

    let bad_form = wittcycle(&["form", "parse", "<1,>"]);
    assert_eq!(bad_form.status.code(), Some(2), "grammar errors are usage");

    let no_seed = wittcycle(&["verify", "thmA7", "--samples", "2"]);
    assert_eq!(no_seed.status.code(), Some(2), "randomized suites need a seed");

    let unknown = wittcycle(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    let help = wittcycle(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let args = [
        "verify",
        "productSign",
        "--samples",
        "5",
        "--seed",
        "3",
        "--format",
        "json",
    ];
    let first = wittcycle(&args);
    let second = wittcycle(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn parse_output_is_canonical_and_idempotent() {
    let first = wittcycle(&["form", "parse", "<2/4, (t^2 - 1)/(t - 1)>"]);
    assert_eq!(first.status.code(), Some(0));
    let canon = stdout_of(&first);
    let again = wittcycle(&["form", "parse", canon.trim()]);
    assert_eq!(stdout_of(&again), canon);

    let sig = wittcycle(&["form", "signature", "<t, t^2 - 4>"]);
    assert_eq!(sig.status.code(), Some(0));
    let shown = stdout_of(&sig);
    let back = wittcycle(&["section", "parse", shown.trim()]);
    assert_eq!(back.status.code(), Some(0));
    assert_eq!(stdout_of(&back), shown);
}

#[test]
fn table_of_rp3_matches_the_pinned_rendering() {
    let out = wittcycle(&["table", "RP3", "--format", "tsv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out), include_str!("golden/table_rp3.tsv"));
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = std::env::temp_dir().join("wittcycle-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("euler.json");
    let direct = wittcycle(&["verify", "eulerP1", "--format", "json"]);
    let filed = wittcycle(&[
        "verify",
        "eulerP1",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(filed.status.code(), Some(0));
    assert!(stdout_of(&filed).is_empty(), "report goes to the file only");
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_file(&path).ok();
}
