//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line;
//! run with `--nocapture` to see them.

mod common;

use std::collections::BTreeSet;

use common::{fixture, fixture_path, iwatower, random_base, random_spec, stdout, table_rows};
use iwatower::artin::{artin_product, enumerate_orbits, l_value_at_one, CharacterIndex};
use iwatower::cyclotomic::Level;
use iwatower::series::{evaluate_at_classical_point, ClassicalPoint};
use iwatower::voltage::derived_graph;
use iwatower::{spanning_tree_count, VoltageSpec};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const TABLES: [(usize, &[u64]); 5] = [
    (1, &[5, 19, 61, 167, 417, 987, 2261, 5071, 11209, 24515]),
    (2, &[8, 34, 124, 422, 1440, 5082, 18644, 70606, 273352, 1073090]),
    (3, &[5, 19, 65, 179, 403, 887, 1923, 4127, 8795, 18647]),
    (4, &[6, 28, 98, 312, 958, 2900, 8730]),
    (5, &[10, 48, 166, 524, 1602, 4840, 14558]),
];

/// Coefficients of `X^2, Y X, X, Y, 1` and the range on which the fit holds.
const FITS: [(usize, [&str; 5], (u32, u32)); 5] = [
    (1, ["0/1", "2/1", "4/1", "-6/1", "-1/1"], (1, 10)),
    (2, ["1/1", "2/1", "4/1", "-6/1", "-2/1"], (1, 10)),
    (3, ["0/1", "1/1", "33/4", "-4/1", "-1/1"], (4, 10)),
    (4, ["0/1", "0/1", "4/1", "-2/1", "-4/1"], (1, 7)),
    (5, ["0/1", "0/1", "20/3", "-2/1", "-8/1"], (1, 7)),
];

fn report(criterion: u32, name: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("PASS criterion {criterion}: {name}");
    } else {
        println!("FAIL criterion {criterion}: {name}");
        for f in failures {
            println!("    {f}");
        }
    }
    assert!(failures.is_empty(), "criterion {criterion} failed: {failures:?}");
}

/// The CLI table for a fixture, L-function route only.
fn lfunction_table(i: usize, n_max: usize) -> Vec<u64> {
    let path = fixture_path(i);
    let out = iwatower(&["table", "--spec", path.to_str().unwrap(), "--n-max", &n_max.to_string(), "--budget", "0"]);
    assert!(out.status.success(), "table failed for example {i}");
    let rows = table_rows(&stdout(&out));
    assert!(rows.iter().all(|r| r.2 == "l-function"));
    rows.iter().map(|r| r.1).collect()
}

fn check_table(i: usize) -> Vec<String> {
    let (_, expected) = TABLES[i - 1];
    let got = lfunction_table(i, expected.len());
    if got == expected {
        vec![]
    } else {
        vec![format!("example {i}: got {got:?}, expected {expected:?}")]
    }
}

#[test]
fn criterion_1_example_1_table() {
    report(1, "example 1 valuations for n = 1..10", &check_table(1));
}

#[test]
fn criterion_2_examples_2_to_5_tables() {
    let failures: Vec<String> = (2..=5).flat_map(check_table).collect();
    report(2, "examples 2-5 valuations to published depth", &failures);
}

#[test]
fn criterion_3_fits_and_verified_ranges() {
    let mut failures = Vec::new();
    for (i, coefficients, range) in FITS {
        let n_max = TABLES[i - 1].1.len().to_string();
        let path = fixture_path(i);
        let out = iwatower(&["fit", "--spec", path.to_str().unwrap(), "--n-max", &n_max, "--budget", "0", "--format", "json"]);
        assert!(out.status.success());
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        let got: Vec<&str> = v["coefficients"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["value"].as_str().unwrap())
            .collect();
        if got != coefficients {
            failures.push(format!("example {i}: coefficients {got:?}, expected {coefficients:?}"));
        }
        let verified = v["verified_range"].as_array().map(|r| (r[0].as_u64().unwrap(), r[1].as_u64().unwrap()));
        if verified != Some((range.0 as u64, range.1 as u64)) {
            failures.push(format!("example {i}: verified range {verified:?}, expected {range:?}"));
        }
    }
    report(3, "exact fits with the published verified ranges", &failures);
}

#[test]
fn criterion_4_route_equivalence_within_budget() {
    let mut failures = Vec::new();
    for i in 1..=5 {
        let spec = fixture(i);
        let n_max = if spec.ell() == 2 { 5 } else { 3 };
        let path = fixture_path(i);
        let out = iwatower(&["table", "--spec", path.to_str().unwrap(), "--n-max", &n_max.to_string(), "--budget", "3000"]);
        if !out.status.success() {
            failures.push(format!("example {i}: {}", common::stderr(&out).trim()));
            continue;
        }
        for (n, _, route, agree) in table_rows(&stdout(&out)) {
            if route != "both" || agree != "true" {
                failures.push(format!("example {i}, n = {n}: route {route}, agree {agree:?}"));
            }
        }
    }
    report(4, "matrix-tree equals the L-function product up to 3000 vertices", &failures);
}

fn all_indices(ell: u64, n: u32, d: usize) -> Vec<Vec<i64>> {
    let m = ell.pow(n) as i64;
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..m).map(move |x| {
                    let mut b = a.clone();
                    b.push(x);
                    b
                })
            })
            .collect();
    }
    out
}

fn classical_point_failures(label: &str, spec: &VoltageSpec) -> Vec<String> {
    let mut failures = Vec::new();
    for n in 1..=3 {
        let level = Level { ell: spec.ell(), n };
        for a in all_indices(spec.ell(), n, spec.d()) {
            let chi = CharacterIndex::new(spec.ell(), n, &a);
            if chi.is_trivial() {
                continue;
            }
            let lhs = evaluate_at_classical_point(spec, &ClassicalPoint::new(level, a.clone()));
            if lhs != l_value_at_one(spec, &chi) {
                failures.push(format!("{label}: level {n}, index {a:?}"));
            }
        }
    }
    failures
}

#[test]
fn criterion_5_series_at_classical_points() {
    let mut failures = Vec::new();
    for i in 1..=5 {
        failures.extend(classical_point_failures(&format!("example {i}"), &fixture(i)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    for k in 0..20 {
        let ell = if k % 2 == 0 { 2 } else { 3 };
        let spec = random_spec(&mut rng, ell, 2, 4, 5);
        failures.extend(classical_point_failures(&format!("random spec {k}"), &spec));
    }
    report(5, "Q at classical points equals h_X(1, psi) for n <= 3", &failures);
}

#[test]
fn criterion_6_class_number_formula() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for k in 0..100 {
        let g = random_base(&mut rng, 8, 8);
        let h = g.ihara_h();
        let kappa = spanning_tree_count(&g).unwrap();
        let expected = BigInt::from(-2 * g.euler_characteristic()) * kappa;
        if !h.vanishes_at_one() || h.derivative_at_one() != expected {
            failures.push(format!("graph {k}: {:?}", g.to_json()));
        }
    }
    report(6, "h(1) = 0 and h'(1) = -2 chi kappa on 100 random graphs", &failures);
}

#[test]
fn criterion_7_artin_formalism_at_layer_1() {
    let mut failures = Vec::new();
    for i in 1..=5 {
        let spec = fixture(i);
        let cover = derived_graph(&spec, 1, 3000).unwrap();
        if artin_product(&spec, 1).unwrap() != cover.graph().ihara_h().0 {
            failures.push(format!("example {i}"));
        }
    }
    report(7, "h_{X_1}(u) equals the product of twisted h_X(u, psi)", &failures);
}

#[test]
fn criterion_8_orbits_mod_8() {
    let mut failures = Vec::new();
    let units: Vec<u64> = (1..8).filter(|u| u % 2 == 1).collect();
    let brute: BTreeSet<BTreeSet<u64>> = (1..8u64)
        .map(|a| units.iter().map(|u| u * a % 8).collect())
        .collect();
    let orbits = enumerate_orbits(2, 3, 1);
    let found: BTreeSet<BTreeSet<u64>> = orbits
        .iter()
        .filter(|o| !o.representative.is_trivial())
        .map(|o| o.members().iter().map(|c| c.a[0]).collect())
        .collect();
    if found != brute {
        failures.push(format!("orbits {found:?}, brute force {brute:?}"));
    }
    let mut shape: Vec<(u64, u64)> = orbits
        .iter()
        .filter(|o| !o.representative.is_trivial())
        .map(|o| (o.exact_order(), o.size))
        .collect();
    shape.sort();
    if shape != [(2, 1), (4, 2), (8, 4)] {
        failures.push(format!("(exact order, size) pairs {shape:?}"));
    }
    report(8, "orbits of (Z/8)^x on nonzero indices have sizes 1, 2, 4", &failures);
}
