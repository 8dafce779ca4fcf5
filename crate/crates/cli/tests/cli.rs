use std::process::{Command, Output};

fn explog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_explog"))
        .args(args)
        .env_remove("EXPLOG_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn rounds_row_at_one_thousand() {
    let out = explog(&["stats", "rounds", "--n", "1000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').map(str::trim).collect();
    let published = "1000, 0.621184, 0.036672, 0.6020, 0.862134, 1.317448";
    let want: Vec<&str> = published.split(',').map(str::trim).collect();
    assert_eq!(fields, want);
}

#[test]
fn colored_perms_constants() {
    let out = explog(&["constants", "--structure", "colored-perms"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("_L G_2(1,1) = 0.47563939666525000670"), "{text}");
    assert!(text.contains("kappa = 1.29..."), "{text}");
}

#[test]
fn square_oracle_row() {
    let out = explog(&["oracle", "square-perms", "--n", "6"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "L: {1,45,80,0,144}  S: {230,0,40}\n");
}

#[test]
fn output_is_deterministic() {
    let args = ["stats", "colored-mappings", "--n", "50..60:5", "--mode", "normalized"];
    let a = explog(&args);
    let b = explog(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_explog"))
        .args(args)
        .env("EXPLOG_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn exact_and_normalized_print_the_same_rows() {
    for st in ["rounds", "colored-derangements", "od-perms"] {
        let exact = explog(&["stats", st, "--n", "100,250,300", "--mode", "exact"]);
        let norm = explog(&["stats", st, "--n", "100,250,300", "--mode", "normalized"]);
        assert!(exact.status.success());
        assert_eq!(stdout(&exact), stdout(&norm), "{st}");
    }
}

#[test]
fn csv_layout() {
    let text = stdout(&explog(&["stats", "rounds", "--n", "10..12", "--stat", "L"]));
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,L_mean/n,L_var/n^2,L_median/n");
    assert_eq!(lines.len(), 4);
    let md = stdout(&explog(&["stats", "rounds", "--n", "10", "--format", "markdown"]));
    assert!(md.starts_with("| n |"));
}

#[test]
fn ev_odd_rows_are_skipped_with_a_notice() {
    let out = explog(&["stats", "ev-perms", "--n", "9,10"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping 9"));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("10,"));
}

#[test]
fn dump_prints_table_entries() {
    let text = stdout(&explog(&["dump", "rounds", "--stat", "L", "--n", "4"]));
    assert!(text.contains("L,rounds,4,2,12\n"), "{text}");
    assert!(text.contains("L,rounds,4,4,8\n"), "{text}");
}

#[test]
fn failures_have_distinct_exit_codes() {
    let unknown = explog(&["stats", "hexagons", "--n", "5"]);
    let usage = explog(&["stats", "rounds", "--n", "zero"]);
    let tol = explog(&["constants", "--tol", "1e-20"]);
    let resource = explog(&["stats", "colored-perms", "--n", "3000", "--mode", "exact", "--max-memory-mib", "1"]);
    let squares = explog(&["stats", "square-perms", "--n", "5"]);
    let codes: Vec<i32> = [&unknown, &usage, &resource]
        .iter()
        .map(|o| o.status.code().unwrap())
        .collect();
    assert_eq!(codes, [3, 2, 4]);
    assert_eq!(tol.status.code(), Some(2));
    assert_eq!(squares.status.code(), Some(2));
    for out in [&unknown, &usage, &tol, &resource, &squares] {
        assert!(out.stdout.is_empty());
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "));
    }
}
