mod common;

use std::process::Command;

use common::{fixture, fixture_path, iwatower, stderr, stdout, table_rows};
use iwatower::kappa_matrix_tree;
use iwatower::voltage::derived_graph;
use num_bigint::BigInt;
use serde_json::Value;

fn spec_arg(i: usize) -> String {
    fixture_path(i).to_str().unwrap().to_string()
}

fn write_spec(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_exit_codes() {
    let ok = iwatower(&["validate", "--spec", &spec_arg(1)]);
    assert_eq!(ok.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let degenerate = write_spec(
        &dir,
        "even.json",
        r#"{"graph": {"vertices": 1, "edges": [[0, 0], [0, 0]]}, "ell": 2, "d": 2, "alpha": [[2, 0], [0, 2]]}"#,
    );
    let out = iwatower(&["validate", "--spec", &degenerate]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("voltages do not generate mod 2"));

    let malformed = write_spec(&dir, "bad.json", "{\"graph\": ");
    let out = iwatower(&["validate", "--spec", &malformed]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"));

    let unknown = write_spec(
        &dir,
        "extra.json",
        r#"{"graph": {"vertices": 1, "edges": [[0, 0]]}, "ell": 2, "d": 1, "alpha": [[1]], "beta": 0}"#,
    );
    assert_eq!(iwatower(&["validate", "--spec", &unknown]).status.code(), Some(2));

    let missing = dir.path().join("absent.json");
    assert_eq!(iwatower(&["validate", "--spec", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(iwatower(&["table"]).status.code(), Some(2));
}

#[test]
fn validate_reports_base_failures() {
    let dir = tempfile::tempdir().unwrap();
    let tree = write_spec(
        &dir,
        "tree.json",
        r#"{"graph": {"vertices": 2, "edges": [[0, 1]]}, "ell": 2, "d": 1, "alpha": [[1]]}"#,
    );
    let out = iwatower(&["validate", "--spec", &tree, "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["valid"], false);
    assert!(!v["reasons"].as_array().unwrap().is_empty());
}

#[test]
fn published_rows() {
    let out = iwatower(&["table", "--spec", &spec_arg(2), "--n-max", "4"]);
    let rows = table_rows(&stdout(&out));
    assert_eq!(rows.iter().map(|r| r.1).collect::<Vec<_>>(), [8, 34, 124, 422]);

    let out = iwatower(&["table", "--spec", &spec_arg(5), "--n-max", "3"]);
    let rows = table_rows(&stdout(&out));
    assert_eq!(rows.iter().map(|r| r.1).collect::<Vec<_>>(), [10, 48, 166]);
    assert!(rows.iter().all(|r| r.2 == "both" && r.3 == "true"));
}

#[test]
fn base_layer_only() {
    let out = iwatower(&["table", "--spec", &spec_arg(1), "--n-max", "0"]);
    assert_eq!(stdout(&out), "n,ord,route,agree\n0,0,l-function,\n");
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, jobs) in ["1", "2"].iter().enumerate() {
        let path = dir.path().join(format!("t{k}.json"));
        let out = iwatower(&[
            "table", "--spec", &spec_arg(3), "--n-max", "6", "--budget", "300", "--format", "json", "--jobs", jobs, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        files.push(std::fs::read(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn timing_column_is_opt_in() {
    let plain = stdout(&iwatower(&["table", "--spec", &spec_arg(1), "--n-max", "2"]));
    assert!(!plain.contains("seconds"));
    let timed = stdout(&iwatower(&["table", "--spec", &spec_arg(1), "--n-max", "2", "--timing"]));
    assert!(timed.starts_with("n,ord,route,agree,seconds\n"));
    assert_eq!(timed.lines().count(), 3);
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_iwatower"))
        .args(["table", "--spec", &spec_arg(1), "--n-max", "2"])
        .env("IWATOWER_BUDGET", "0")
        .output()
        .unwrap();
    assert!(table_rows(&stdout(&out)).iter().all(|r| r.2 == "l-function"));
}

#[test]
fn fit_reports() {
    let out = iwatower(&["fit", "--spec", &spec_arg(4), "--n-max", "7", "--budget", "0"]);
    let text = stdout(&out);
    assert!(text.contains("formula,4·3^n − 2n − 4\n"));
    assert!(text.contains("verified_range,1..7\n"));
    assert!(text.contains("stable,true\n"));

    let out = iwatower(&["fit", "--spec", &spec_arg(2), "--n-max", "10", "--budget", "0", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["formula"], "2^{2n} + 2n·2^n + 4·2^n − 6n − 2");
    assert_eq!(v["verified_range"], serde_json::json!([1, 10]));
    assert_eq!(v["leading_integral"], true);
}

#[test]
fn cycle_tower_fit() {
    // Layer n is a cycle of length 3^n with a loop at every vertex.
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        &dir,
        "cycle.json",
        r#"{"graph": {"vertices": 1, "edges": [[0, 0], [0, 0]]}, "ell": 3, "d": 1, "alpha": [[1], [0]]}"#,
    );
    let table = stdout(&iwatower(&["table", "--spec", &spec, "--n-max", "5", "--budget", "0"]));
    assert_eq!(table_rows(&table).iter().map(|r| r.1).collect::<Vec<_>>(), [1, 2, 3, 4, 5]);
    let fit = stdout(&iwatower(&["fit", "--spec", &spec, "--n-max", "5", "--budget", "0"]));
    assert!(fit.contains("formula,n\n"));
    assert!(fit.contains("verified_range,1..5\n"));
}

#[test]
fn lvalue_product_recovers_tree_count() {
    let spec = fixture(1);
    for n in 1..=2u32 {
        let out = iwatower(&["lvalues", "--spec", &spec_arg(1), "--n-max", &n.to_string()]);
        assert!(out.status.success());
        let text = stdout(&out);
        assert!(text.starts_with("representative,exact_order,size,value,ord\n"));
        let product: BigInt = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse::<BigInt>().unwrap())
            .product();
        let kappa = kappa_matrix_tree(derived_graph(&spec, n, 1000).unwrap().graph(), 2).unwrap().kappa;
        assert_eq!(product, kappa * BigInt::from(2).pow(2 * n));
    }
}

#[test]
fn lvalues_suppress_large_values() {
    let out = iwatower(&["lvalues", "--spec", &spec_arg(1), "--n-max", "3", "--norm-degree", "1"]);
    let text = stdout(&out);
    let blanks = text.lines().skip(1).filter(|l| l.split(',').nth(3) == Some("")).count();
    assert!(blanks > 0);
    assert!(text.lines().skip(1).all(|l| !l.ends_with(',')));
}

#[test]
fn qseries_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        &dir,
        "d1.json",
        r#"{"graph": {"vertices": 1, "edges": [[0, 0], [0, 0]]}, "ell": 2, "d": 1, "alpha": [[1], [3]]}"#,
    );
    let out = iwatower(&["qseries", "--spec", &spec, "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["variables"], 1);
    assert_eq!(v["iwasawa"]["status"], "certified");
    assert_eq!(v["iwasawa"]["mu"], 0);
    assert!(v["coefficients"].as_object().unwrap().values().all(|c| c.as_str().unwrap().parse::<i64>().is_ok()));

    let out = iwatower(&["qseries", "--spec", &spec_arg(1), "--trunc", "4", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["truncation"], 4);
    assert!(v.get("iwasawa").is_none());
}

#[test]
fn export_dot_layers() {
    let base = stdout(&iwatower(&["export-dot", "--spec", &spec_arg(1)]));
    assert!(base.starts_with("graph"));
    let layer1 = stdout(&iwatower(&["export-dot", "--spec", &spec_arg(1), "--layer", "1"]));
    assert_eq!(layer1.matches("label=").count(), 4);
    assert_eq!(layer1.matches(" -- ").count(), 8);

    let out = iwatower(&["export-dot", "--spec", &spec_arg(1), "--layer", "8", "--budget", "3000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("budget"));
}
