#![allow(dead_code)]

use std::path::PathBuf;

use iwatower::{MultiGraph, VoltageSpec};
use rand::Rng;

pub fn fixture(i: usize) -> VoltageSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/example{i}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    VoltageSpec::parse_json(&text).unwrap()
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

/// Spanning trees counted one subset of edges at a time.
pub fn brute_force_trees(g: &MultiGraph) -> u64 {
    let n = g.vertex_count();
    let edges: Vec<(usize, usize)> = g.undirected_edges().map(|e| (g.origin(e), g.terminus(e))).collect();
    let m = edges.len();
    let mut count = 0;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut forest = true;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    forest = false;
                    break;
                }
                parent[ra] = rb;
            }
        }
        if forest {
            count += 1;
        }
    }
    count
}
