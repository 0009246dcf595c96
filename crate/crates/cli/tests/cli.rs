use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rrk_core::experiments::{read_history_csv, HISTORY_HEADER};
use rrk_core::problems::load_problem;

fn rrk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rrk"))
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .env_remove("RUST_LIB_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = rrk(args);
    assert!(
        out.status.success(),
        "rrk {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = rrk(args);
    assert!(!out.status.success(), "rrk {args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn wine_csv() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/winequality-red.csv")
}

fn gen(dir: &Path, consistent: bool) {
    let c = if consistent { "true" } else { "false" };
    ok(&[
        "gen",
        "--m",
        "60",
        "--l",
        "8",
        "--n",
        "30",
        "--s",
        "3",
        "--consistent",
        c,
        "--seed",
        "4",
        "--out",
        s(dir),
    ]);
}

#[test]
fn gen_writes_a_loadable_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    gen(&dir, false);
    let p = load_problem(&dir).unwrap();
    assert_eq!(p.dims(), (60, 8, 30));
    assert!(!p.consistent());
    assert_eq!(p.x_star().unwrap().iter().filter(|v| **v != 0.0).count(), 3);

    // bare --consistent means true
    let dir2 = tmp.path().join("q");
    ok(&[
        "gen",
        "--m",
        "20",
        "--l",
        "4",
        "--n",
        "10",
        "--s",
        "2",
        "--consistent",
        "--out",
        s(&dir2),
    ]);
    assert!(load_problem(&dir2).unwrap().consistent());
}

#[test]
fn solve_defaults_follow_the_consistency_flag() {
    let tmp = tempfile::tempdir().unwrap();
    for (consistent, expect) in [(true, "RK-RSK"), (false, "RGS-RSK")] {
        let dir = tmp.path().join(format!("p{consistent}"));
        gen(&dir, consistent);
        let stdout = ok(&["solve", "--problem", s(&dir), "--maxit", "200"]);
        assert!(
            stdout.contains(&format!("algorithm   {expect}")),
            "{stdout}"
        );
    }
}

#[test]
fn solve_writes_histories() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    let out = tmp.path().join("out");
    gen(&dir, true);
    ok(&[
        "solve",
        "--problem",
        s(&dir),
        "--alg",
        "rk-rk",
        "--maxit",
        "10m",
        "--trials",
        "3",
        "--log-every",
        "100",
        "--out",
        s(&out),
    ]);
    let text = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), HISTORY_HEADER);
    let rows = read_history_csv(out.join("history.csv")).unwrap();
    let ks: Vec<usize> = rows.iter().map(|r| r.row.k).collect();
    assert_eq!(ks, vec![0, 100, 200, 300, 400, 500, 600]);
    assert!(rows
        .iter()
        .all(|r| r.algorithm == "RK-RK" && r.trial_count == 3));
    assert!(out.join("tidy.csv").exists());
    assert!(out.join("spread.csv").exists());
    let x = std::fs::read_to_string(out.join("final_x.csv")).unwrap();
    assert_eq!(x.lines().count(), 30);

    // same seed, same numbers
    let out2 = tmp.path().join("out2");
    ok(&[
        "solve",
        "--problem",
        s(&dir),
        "--alg",
        "rk-rk",
        "--maxit",
        "10m",
        "--trials",
        "3",
        "--log-every",
        "100",
        "--out",
        s(&out2),
    ]);
    let again = std::fs::read_to_string(out2.join("history.csv")).unwrap();
    assert_eq!(without_elapsed(&text), without_elapsed(&again));
}

/// Drops the wall-clock column, which differs between runs.
fn without_elapsed(csv: &str) -> Vec<&str> {
    csv.lines().map(|l| l.rsplit_once(',').unwrap().0).collect()
}

#[test]
fn solve_rejects_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    gen(&dir, true);
    let err = fails(&["solve", "--problem", s(&dir), "--maxit", "lots"]);
    assert!(err.contains("lots"), "{err}");
    let err = fails(&[
        "solve",
        "--problem",
        s(&dir),
        "--alg",
        "rk-rsk",
        "--reg",
        "quadratic",
    ]);
    assert!(err.contains("quadratic"), "{err}");
    let err = fails(&["solve", "--problem", s(&dir), "--alg", "nope"]);
    assert!(err.contains("nope"), "{err}");
    std::fs::remove_file(dir.join("B.csv")).unwrap();
    let err = fails(&["solve", "--problem", s(&dir)]);
    assert!(err.contains("B.csv"), "{err}");
}

#[test]
fn bounds_prints_constants_and_table() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("p");
    gen(&dir, true);
    let stdout = ok(&[
        "bounds",
        "--problem",
        s(&dir),
        "--alg",
        "rk-rk",
        "--ks",
        "0,10,100",
    ]);
    for key in ["# alpha", "# beta", "# rho", "# nu", "# delta"] {
        assert!(stdout.contains(key), "{stdout}");
    }
    let csv: Vec<&str> = stdout.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(csv[0], "k,theorem_bound,simplified_bound");
    assert_eq!(csv.len(), 4);
    assert!(csv[1].starts_with("0,"));

    // an explicit δ outside the envelope's range leaves that column empty
    let stdout = ok(&[
        "bounds",
        "--problem",
        s(&dir),
        "--alg",
        "rk-rk",
        "--delta",
        "10",
        "--ks",
        "5",
    ]);
    assert!(stdout.lines().last().unwrap().ends_with(','), "{stdout}");

    let err = fails(&["bounds", "--problem", s(&dir), "--alg", "rk-rsk"]);
    assert!(err.contains("ν"), "{err}");
    ok(&[
        "bounds",
        "--problem",
        s(&dir),
        "--alg",
        "rk-rsk",
        "--nu",
        "0.5",
    ]);
    let err = fails(&["bounds", "--problem", s(&dir), "--alg", "gerk"]);
    assert!(err.contains("factored"), "{err}");
}

#[test]
fn ingest_wine_writes_both_problems() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("wine");
    ok(&[
        "ingest-wine",
        "--csv",
        s(&wine_csv()),
        "--nmf-iters",
        "20",
        "--out",
        s(&out),
    ]);
    let c = load_problem(out.join("consistent")).unwrap();
    let i = load_problem(out.join("inconsistent")).unwrap();
    assert_eq!(c.dims(), (1599, 5, 11));
    assert!(c.consistent() && !i.consistent());
    assert_eq!(c.a(), i.a());
    assert_eq!(
        c.x_star().unwrap(),
        &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1.]
    );

    let err = fails(&[
        "ingest-wine",
        "--csv",
        s(&wine_csv()),
        "--delimiter",
        ";",
        "--out",
        s(&out),
    ]);
    assert!(!err.is_empty());
}

#[test]
fn reproduce_example_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rep");
    let stdout = ok(&[
        "reproduce",
        "example1-inconsistent",
        "--trials",
        "2",
        "--maxit",
        "200",
        "--out",
        s(&out),
    ]);
    assert!(
        stdout.contains("RGS-RK") && stdout.contains("RGS-RSK"),
        "{stdout}"
    );
    for f in [
        "history.csv",
        "tidy.csv",
        "spread.csv",
        "final_iterates.csv",
        "summary.txt",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let err = fails(&["reproduce", "example2-consistent"]);
    assert!(err.contains("wine"), "{err}");
    let err = fails(&["reproduce", "example3"]);
    assert!(err.contains("example3"), "{err}");
}
