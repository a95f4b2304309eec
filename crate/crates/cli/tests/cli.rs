use std::process::{Command, Output};

fn manyone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manyone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = manyone(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Drops the runtime column, which is the only nondeterministic field.
fn without_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            if f.len() == 9 {
                f.remove(7);
            }
            f.join(",")
        })
        .collect()
}

#[test]
fn gen_then_solve_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.txt");
    let assign = dir.path().join("assign.csv");
    stdout(&[
        "gen",
        "--n",
        "7",
        "--alpha",
        "2",
        "--seed",
        "3",
        "--out",
        inst.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&inst).unwrap();
    assert!(text.starts_with("7 4 2 3"));

    let exact = stdout(&[
        "solve",
        "--input",
        inst.to_str().unwrap(),
        "--solver",
        "exact",
    ]);
    let brute = stdout(&[
        "solve",
        "--input",
        inst.to_str().unwrap(),
        "--solver",
        "brute",
        "--out",
        assign.to_str().unwrap(),
    ]);
    let cost = |s: &str| {
        s.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(5)
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    assert!((cost(&exact) - cost(&brute)).abs() < 1e-9);
    let rows = std::fs::read_to_string(&assign).unwrap();
    assert_eq!(rows.lines().count(), 8);
}

#[test]
fn mc_is_reproducible() {
    let args = [
        "mc", "--n", "40", "--trials", "2", "--solver", "bp", "--k", "10", "--seed", "5",
    ];
    let a = stdout(&args);
    let b = stdout(&args);
    assert_eq!(without_runtime(&a), without_runtime(&b));
    assert!(a.contains("mean_cost_over_n"));
}

#[test]
fn mc_writes_records_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.csv");
    let summary = stdout(&[
        "mc",
        "--n",
        "20,30",
        "--trials",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    let records = std::fs::read_to_string(&path).unwrap();
    assert_eq!(records.lines().count(), 5);
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn bp_emits_iteration_rows() {
    let out = stdout(&["bp", "--n", "30", "--k", "6", "--seed", "1"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "k,sup_norm_delta_ab,sup_norm_delta_ba,uncovered_count"
    );
    assert_eq!(lines.len(), 7);
}

#[test]
fn compare_rows_per_trial_and_k() {
    let out = stdout(&["compare", "--n", "30", "--trials", "2", "--k", "5,10"]);
    assert_eq!(out.lines().count(), 5);
    for line in out.lines().skip(1) {
        let ratio: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
        assert!(ratio >= 1.0 - 1e-12);
    }
}

#[test]
fn rde_prints_constants() {
    let out = stdout(&["rde", "--alpha", "2"]);
    let row: Vec<f64> = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(row.len(), 5);
    assert!((row[3] - row[4]).abs() < 1e-8);
}

#[test]
fn pool_subcommands() {
    let out = stdout(&["popdyn", "--pool", "2000", "--k", "3"]);
    assert_eq!(out.lines().count(), 5);
    let out = stdout(&["endogeny", "--pool", "2000", "--k", "3"]);
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn pwit_summaries_and_samples() {
    let out = stdout(&[
        "pwit",
        "--trials",
        "50",
        "--k",
        "2,4",
        "--depth",
        "5",
        "--root-label",
        "o",
    ]);
    assert_eq!(out.lines().count(), 3);
    let out = stdout(&[
        "pwit",
        "--trials",
        "20",
        "--k",
        "2",
        "--depth",
        "3",
        "--root-label",
        "m",
        "--samples",
    ]);
    assert_eq!(out.lines().count(), 21);
    assert!(out.lines().skip(1).all(|l| l.starts_with("2,o,")));
}

#[test]
fn validation_failures_exit_nonzero() {
    for args in [
        &["mc", "--alpha", "1"][..],
        &["mc", "--n", "0"],
        &["gen", "--n", "0"],
        &["pwit", "--k", "8", "--depth", "8"],
        &["solve", "--n", "30", "--solver", "brute"],
        &["solve", "--solver", "nope"],
        &["popdyn", "--pool", "0"],
    ] {
        let out = manyone(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
