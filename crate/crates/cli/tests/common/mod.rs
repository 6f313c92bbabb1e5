#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use iwatower::{MultiGraph, VoltageSpec};
use rand::Rng;

pub fn fixture_path(i: usize) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/example{i}.json"))
}

pub fn fixture(i: usize) -> VoltageSpec {
    VoltageSpec::parse_json(&std::fs::read_to_string(fixture_path(i)).unwrap()).unwrap()
}

pub fn iwatower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwatower"))
        .args(args)
        .env_remove("IWATOWER_BUDGET")
        .output()
        .expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// `(n, ord, route, agree)` rows of a CSV table.
pub fn table_rows(csv: &str) -> Vec<(u32, u64, String, String)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string(), f[3].to_string())
        })
        .collect()
}

/// Connected multigraph on `1..=max_vertices` vertices that passes base
/// validation: a random tree plus random extra edges (loops allowed).
pub fn random_base(rng: &mut impl Rng, max_vertices: usize, max_extra: usize) -> MultiGraph {
    loop {
        let n = rng.gen_range(1..=max_vertices);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
        for _ in 0..rng.gen_range(1..=max_extra) {
            edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
        }
        let g = MultiGraph::build(n, &edges).unwrap();
        if g.validate().passes() {
            return g;
        }
    }
}

/// A tower over a random base whose layers are all connected.
pub fn random_spec(rng: &mut impl Rng, ell: u64, d: usize, max_vertices: usize, bound: i64) -> VoltageSpec {
    loop {
        let g = random_base(rng, max_vertices, 4);
        let alpha = (0..g.undirected_edge_count())
            .map(|_| (0..d).map(|_| rng.gen_range(-bound..=bound)).collect())
            .collect();
        let spec = VoltageSpec::with_default_section(g, alpha, ell, d).unwrap();
        if spec.validate().is_ok() {
            return spec;
        }
    }
}
