use std::process::{Command, Output};

const DEMO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../projects/demo.toml");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackcount")).args(args).output().expect("binary runs")
}

fn demo(args: &[&str]) -> Output {
    let mut all = vec!["--project", DEMO];
    all.extend_from_slice(args);
    run(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
}

#[test]
fn documented_examples() {
    let o = demo(&["count", "--target", "X_conic", "--ring", "p5n0"]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "count"), Some("4"));

    let o = run(&["series", "--target", "A1", "--ring", "p3n0", "--kind", "tilde", "--terms", "8", "--fit"]);
    assert_eq!(value(&stdout(&o), "fit"), Some("1/(1 - 3T)"));
    assert_eq!(value(&stdout(&o), "c_7"), Some("2187/1"));

    let o = run(&["stack-count", "--stack", "BS3", "--field", "q=5"]);
    assert_eq!(value(&stdout(&o), "count"), Some("1/1"));
}

#[test]
fn every_report_states_the_normalization() {
    let cases: &[&[&str]] = &[
        &["count", "--target", "A1", "--ring", "p3n1"],
        &["witt", "--p", "2"],
        &["singular", "--target", "cusp"],
        &["measure", "--target", "A1", "--ring", "p3n0"],
    ];
    for args in cases {
        let o = demo(args);
        assert!(o.status.success(), "{args:?}");
        let out = stdout(&o);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some(format!("command: {}", args[0]).as_str()));
        assert_eq!(lines.next(), Some(format!("normalization: {}", stackcount::measures::NORMALIZATION).as_str()));
    }
}

#[test]
fn measures_and_specialization_through_the_cli() {
    let out = stdout(&demo(&["measure", "--target", "xy3", "--ring", "p3n0", "--max-level", "3"]));
    assert_eq!(value(&out, "status"), Some("STABILIZED"));
    assert_eq!(value(&out, "value"), Some("4/3"));
    assert_eq!(value(&out, "stable_from"), Some("1"));

    let out = stdout(&demo(&["measure", "--ring", "p5n0", "--set", "positive_order"]));
    assert_eq!(value(&out, "value"), Some("1/5"));

    let out = stdout(&demo(&["measure", "--target", "BGm", "--ring", "p3n0", "--max-level", "3"]));
    assert_eq!(value(&out, "dimension"), Some("-1"));
    assert_eq!(value(&out, "value"), Some("1/2"));

    let out = stdout(&demo(&["specialize", "--set", "positive_order"]));
    assert_eq!(value(&out, "prime 7"), Some("MATCH measure 1/7"));
}

#[test]
fn greenberg_and_singular_reports() {
    let out = stdout(&demo(&["greenberg", "--target", "sq7", "--ring", "p3n1", "--emit-equations"]));
    assert_eq!(value(&out, "transform_count"), Some("2"));
    assert_eq!(value(&out, "ring_count"), Some("2"));
    assert_eq!(value(&out, "equal"), Some("true"));
    assert_eq!(out.lines().filter(|l| l.starts_with("equation: ")).count(), 2);

    let out = stdout(&demo(&["singular", "--target", "X_conic", "--ring", "p5n0"]));
    assert_eq!(value(&out, "count"), Some("0"));
}

#[test]
fn exit_statuses() {
    assert_eq!(run(&["count", "--target", "A1"]).status.code(), Some(2));
    assert_eq!(run(&["--project", "/nonexistent.toml", "witt", "--p", "2"]).status.code(), Some(3));
    let o = run(&["measure", "--target", "A1", "--ring", "p3n0", "--set", "ord(z) >= 1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 4"));
    assert_eq!(run(&["count", "--target", "A3", "--ring", "p7n2", "--bound", "1000"]).status.code(), Some(4));
    assert_eq!(run(&["witt", "--p", "4"]).status.code(), Some(1));

    // the cusp has not stabilized by level 2
    let partial = ["measure", "--target", "cusp", "--ring", "p3n0", "--max-level", "2"];
    assert_eq!(demo(&partial).status.code(), Some(0));
    let mut strict = vec!["--strict"];
    strict.extend_from_slice(&partial);
    assert_eq!(demo(&strict).status.code(), Some(5));

    let mismatch = ["--strict", "specialize", "--set", "hyperbola_t", "--expect", "1/q^2", "--max-level", "3"];
    assert_eq!(demo(&mismatch).status.code(), Some(5));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["series", "--target", "cusp", "--ring", "p5n0", "--kind", "q", "--terms", "4", "--fit"];
    let a = demo(&args);
    let b = demo(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
