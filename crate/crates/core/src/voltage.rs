//! Voltage assignments in `Z^d`, the derived graphs `X_n` they define over
//! `G(n) = (Z/ell^n)^d`, and connectivity of the whole tower.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphJson, MultiGraph};

/// One chosen directed edge per undirected edge, listed in undirected-edge
/// order (orbits sorted by their smaller directed id).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    chosen: Vec<usize>,
}

impl Section {
    /// The smaller directed edge id of each orbit.
    pub fn default_for(g: &MultiGraph) -> Self {
        Section {
            chosen: g.undirected_edges().collect(),
        }
    }

    /// A section from explicit choices, one per undirected edge in order.
    pub fn new(g: &MultiGraph, chosen: Vec<usize>) -> Result<Self> {
        let orbits: Vec<usize> = g.undirected_edges().collect();
        if chosen.len() != orbits.len() {
            return Err(Error::InvalidVoltage(format!(
                "section has {} edges, graph has {} undirected edges",
                chosen.len(),
                orbits.len()
            )));
        }
        for (&c, &e) in chosen.iter().zip(&orbits) {
            if c != e && c != g.inverse(e) {
                return Err(Error::InvalidVoltage(format!(
                    "edge {c} does not belong to the orbit of edge {e}"
                )));
            }
        }
        Ok(Section { chosen })
    }

    pub fn edges(&self) -> &[usize] {
        &self.chosen
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

pub fn default_section(g: &MultiGraph) -> Section {
    Section::default_for(g)
}

/// Tower description as read from disk. `alpha[i]` is the voltage of
/// undirected edge `i` in its listed direction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSpecJson {
    pub graph: GraphJson,
    pub ell: u64,
    pub d: usize,
    pub alpha: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoltageSpec {
    base: MultiGraph,
    section: Section,
    alpha: Vec<Vec<i64>>,
    ell: u64,
    d: usize,
    /// Voltage of every directed edge, with `alpha(bar s) = -alpha(s)`.
    edge_voltage: Vec<Vec<i64>>,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

impl VoltageSpec {
    pub fn new(base: MultiGraph, section: Section, alpha: Vec<Vec<i64>>, ell: u64, d: usize) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if d == 0 {
            return Err(Error::InvalidVoltage("d must be positive".into()));
        }
        if alpha.len() != section.len() {
            return Err(Error::InvalidVoltage(format!(
                "{} voltages given for {} section edges",
                alpha.len(),
                section.len()
            )));
        }
        if let Some(bad) = alpha.iter().position(|a| a.len() != d) {
            return Err(Error::InvalidVoltage(format!(
                "voltage {bad} has {} components, expected d = {d}",
                alpha[bad].len()
            )));
        }
        let mut edge_voltage = vec![Vec::new(); base.directed_edge_count()];
        for (&s, a) in section.edges().iter().zip(&alpha) {
            edge_voltage[s] = a.clone();
            edge_voltage[base.inverse(s)] = a.iter().map(|x| -x).collect();
        }
        Ok(VoltageSpec {
            base,
            section,
            alpha,
            ell,
            d,
            edge_voltage,
        })
    }

    /// Spec over the default section.
    pub fn with_default_section(base: MultiGraph, alpha: Vec<Vec<i64>>, ell: u64, d: usize) -> Result<Self> {
        let section = Section::default_for(&base);
        VoltageSpec::new(base, section, alpha, ell, d)
    }

    pub fn from_json(json: &TowerSpecJson) -> Result<Self> {
        let base = MultiGraph::from_json(&json.graph)?;
        VoltageSpec::with_default_section(base, json.alpha.clone(), json.ell, json.d)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let json: TowerSpecJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        VoltageSpec::from_json(&json)
    }

    /// JSON form; voltages are re-expressed on the default section.
    pub fn to_json(&self) -> TowerSpecJson {
        TowerSpecJson {
            graph: self.base.to_json(),
            ell: self.ell,
            d: self.d,
            alpha: self
                .base
                .undirected_edges()
                .map(|e| self.edge_voltage[e].clone())
                .collect(),
        }
    }

    pub fn base(&self) -> &MultiGraph {
        &self.base
    }

    pub fn section(&self) -> &Section {
        &self.section
    }

    pub fn alpha(&self) -> &[Vec<i64>] {
        &self.alpha
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Voltage of a directed edge of the base.
    pub fn voltage(&self, e: usize) -> &[i64] {
        &self.edge_voltage[e]
    }

    /// Base validity plus connectivity of every layer.
    pub fn validate(&self) -> Result<()> {
        self.base.validate().into_result()?;
        let c = check_tower_connectivity(self);
        if !c.connected {
            return Err(Error::InvalidVoltage(format!(
                "voltages do not generate mod {}",
                self.ell
            )));
        }
        Ok(())
    }
}

/// `alpha_n`: section voltages reduced into `[0, ell^n)`.
pub fn reduce_voltage(spec: &VoltageSpec, n: u32) -> Vec<Vec<u64>> {
    let group = LayerGroup::new(spec.ell, n, spec.d);
    spec.alpha.iter().map(|a| group.reduce(a)).collect()
}

/// The group `G(n) = (Z/ell^n)^d`, elements stored as vectors with entries in
/// `[0, ell^n)` and indexed in mixed radix, first coordinate fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerGroup {
    pub ell: u64,
    pub n: u32,
    pub d: usize,
    pub modulus: u64,
}

impl LayerGroup {
    pub fn new(ell: u64, n: u32, d: usize) -> Self {
        LayerGroup {
            ell,
            n,
            d,
            modulus: ell.pow(n),
        }
    }

    /// `|G(n)|`, or `None` if it does not fit in `u128`.
    pub fn order(&self) -> Option<u128> {
        (self.modulus as u128).checked_pow(self.d as u32)
    }

    pub fn reduce(&self, a: &[i64]) -> Vec<u64> {
        let m = self.modulus as i128;
        a.iter().map(|&x| (x as i128).rem_euclid(m) as u64).collect()
    }

    pub fn encode(&self, sigma: &[u64]) -> usize {
        sigma
            .iter()
            .rev()
            .fold(0usize, |acc, &s| acc * self.modulus as usize + s as usize)
    }

    pub fn decode(&self, mut index: usize) -> Vec<u64> {
        let m = self.modulus as usize;
        (0..self.d)
            .map(|_| {
                let s = index % m;
                index /= m;
                s as u64
            })
            .collect()
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.modulus).collect()
    }

    /// Image under the reduction `G(n) -> G(m)`.
    pub fn project(&self, sigma: &[u64], m: u32) -> Vec<u64> {
        let target = self.ell.pow(m);
        sigma.iter().map(|s| s % target).collect()
    }
}

/// Layer `n` of the tower. Vertex `(v, sigma)` has id
/// `index(sigma) * |V_X| + v`, directed edge `(e, sigma)` has id
/// `index(sigma) * |E_X| + e` (directed counts).
#[derive(Clone, Debug)]
pub struct DerivedGraph {
    graph: MultiGraph,
    group: LayerGroup,
    base_vertices: usize,
    base_edges: usize,
}

impl DerivedGraph {
    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn into_graph(self) -> MultiGraph {
        self.graph
    }

    pub fn group(&self) -> LayerGroup {
        self.group
    }

    pub fn vertex_id(&self, v: usize, sigma: &[u64]) -> usize {
        self.group.encode(sigma) * self.base_vertices + v
    }

    pub fn edge_id(&self, e: usize, sigma: &[u64]) -> usize {
        self.group.encode(sigma) * self.base_edges + e
    }

    /// `(base vertex, group element)` of a derived vertex.
    pub fn vertex_label(&self, w: usize) -> (usize, Vec<u64>) {
        (w % self.base_vertices, self.group.decode(w / self.base_vertices))
    }

    /// `(base directed edge, group element)` of a derived directed edge.
    pub fn edge_label(&self, f: usize) -> (usize, Vec<u64>) {
        (f % self.base_edges, self.group.decode(f / self.base_edges))
    }

    /// DOT rendering with vertices colored by their base vertex (the fiber).
    pub fn to_dot(&self, name: &str) -> String {
        const PALETTE: [&str; 8] = [
            "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        ];
        self.graph.to_dot_with(name, |w| {
            let (v, sigma) = self.vertex_label(w);
            let mut label = format!("{v}|");
            for (i, s) in sigma.iter().enumerate() {
                if i > 0 {
                    label.push(',');
                }
                let _ = write!(label, "{s}");
            }
            format!(
                "label=\"{label}\", style=filled, fillcolor=\"{}\"",
                PALETTE[v % PALETTE.len()]
            )
        })
    }
}

/// Vertex count of layer `n`, saturating at `u128::MAX`.
pub fn layer_vertex_count(spec: &VoltageSpec, n: u32) -> u128 {
    (spec.ell as u128)
        .checked_pow(n)
        .and_then(|m| m.checked_pow(spec.d as u32))
        .and_then(|o| o.checked_mul(spec.base.vertex_count() as u128))
        .unwrap_or(u128::MAX)
}

/// Builds `X_n`. Rejects layers above `budget` vertices and disconnected layers.
pub fn derived_graph(spec: &VoltageSpec, n: u32, budget: u64) -> Result<DerivedGraph> {
    let vertices = layer_vertex_count(spec, n);
    if vertices > budget as u128 {
        return Err(Error::OverBudget {
            layer: n,
            vertices,
            budget,
        });
    }
    let derived = derived_graph_unchecked(spec, n);
    if !derived.graph.is_connected() {
        return Err(Error::DisconnectedLayer { layer: n });
    }
    Ok(derived)
}

fn derived_graph_unchecked(spec: &VoltageSpec, n: u32) -> DerivedGraph {
    let base = &spec.base;
    let group = LayerGroup::new(spec.ell, n, spec.d);
    let (nv, ne) = (base.vertex_count(), base.directed_edge_count());
    let order = group.order().expect("layer size checked by caller") as usize;
    let shifts: Vec<Vec<u64>> = (0..ne).map(|e| group.reduce(spec.voltage(e))).collect();
    let mut origin = Vec::with_capacity(order * ne);
    let mut terminus = Vec::with_capacity(order * ne);
    let mut inverse = Vec::with_capacity(order * ne);
    for idx in 0..order {
        let sigma = group.decode(idx);
        for e in 0..ne {
            let target = group.encode(&group.add(&sigma, &shifts[e]));
            origin.push(idx * nv + base.origin(e));
            terminus.push(target * nv + base.terminus(e));
            inverse.push(target * ne + base.inverse(e));
        }
    }
    let graph = MultiGraph::from_parts(order * nv, origin, terminus, inverse)
        .expect("derived incidence is consistent by construction");
    DerivedGraph {
        graph,
        group,
        base_vertices: nv,
        base_edges: ne,
    }
}

/// Outcome of the tower connectivity test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub connected: bool,
    /// Rank of the cycle voltages modulo `ell`.
    pub rank: usize,
    pub d: usize,
    /// Voltage of the fundamental cycle of each undirected edge relative to
    /// a BFS spanning tree (zero for tree edges).
    pub cycle_voltages: Vec<Vec<i64>>,
}

/// Every layer is connected iff the cycle voltages span `(Z/ell)^d`: by
/// Nakayama, generating mod `ell` means generating `(Z/ell^n)^d` for all `n`.
pub fn check_tower_connectivity(spec: &VoltageSpec) -> ConnectivityReport {
    let base = &spec.base;
    let (parent, order) = base.bfs_tree();
    let mut potential = vec![vec![0i64; spec.d]; base.vertex_count()];
    for &v in &order {
        if let Some(Some(e)) = parent[v] {
            let from = potential[base.origin(e)].clone();
            potential[v] = from.iter().zip(spec.voltage(e)).map(|(p, a)| p + a).collect();
        }
    }
    let cycle_voltages: Vec<Vec<i64>> = base
        .undirected_edges()
        .map(|s| {
            let (o, t) = (base.origin(s), base.terminus(s));
            (0..spec.d)
                .map(|i| potential[o][i] + spec.voltage(s)[i] - potential[t][i])
                .collect()
        })
        .collect();
    let rank = rank_mod_prime(&cycle_voltages, spec.ell);
    ConnectivityReport {
        connected: rank == spec.d && base.is_connected(),
        rank,
        d: spec.d,
        cycle_voltages,
    }
}

fn rank_mod_prime(rows: &[Vec<i64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| (x as i128).rem_euclid(p as i128) as u64).collect())
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = (m[r][c] as u128 * inv as u128 % p as u128) as u64;
                for j in c..cols {
                    let sub = (f as u128 * m[rank][j] as u128 % p as u128) as u64;
                    m[r][j] = (m[r][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut out = 1u128;
    let mut base = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            out = out * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    b = out as u64;
    b
}

/// A map of graphs given on vertices and directed edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMorphism {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
}

impl GraphMorphism {
    /// Checks that the map preserves incidence and inversion and is a
    /// bijection from the edges at each vertex onto the edges at its image.
    pub fn is_covering(&self, source: &MultiGraph, target: &MultiGraph) -> bool {
        if self.vertex_map.len() != source.vertex_count() || self.edge_map.len() != source.directed_edge_count() {
            return false;
        }
        for e in 0..source.directed_edge_count() {
            let f = self.edge_map[e];
            if target.origin(f) != self.vertex_map[source.origin(e)]
                || target.terminus(f) != self.vertex_map[source.terminus(e)]
                || target.inverse(f) != self.edge_map[source.inverse(e)]
            {
                return false;
            }
        }
        for w in 0..source.vertex_count() {
            let mut image: Vec<usize> = source.edges_at(w).map(|e| self.edge_map[e]).collect();
            let mut star: Vec<usize> = target.edges_at(self.vertex_map[w]).collect();
            image.sort_unstable();
            star.sort_unstable();
            if image != star {
                return false;
            }
        }
        true
    }

    pub fn compose(&self, then: &GraphMorphism) -> GraphMorphism {
        GraphMorphism {
            vertex_map: self.vertex_map.iter().map(|&v| then.vertex_map[v]).collect(),
            edge_map: self.edge_map.iter().map(|&e| then.edge_map[e]).collect(),
        }
    }
}

/// The projection `X_n -> X_m` induced by `G(n) -> G(m)`.
pub fn intermediate_projection(spec: &VoltageSpec, n: u32, m: u32, budget: u64) -> Result<GraphMorphism> {
    if m > n {
        return Err(Error::InvalidVoltage(format!("cannot project layer {n} to layer {m}")));
    }
    let vertices = layer_vertex_count(spec, n);
    if vertices > budget as u128 {
        return Err(Error::OverBudget {
            layer: n,
            vertices,
            budget,
        });
    }
    let (src, dst) = (LayerGroup::new(spec.ell, n, spec.d), LayerGroup::new(spec.ell, m, spec.d));
    let (nv, ne) = (spec.base.vertex_count(), spec.base.directed_edge_count());
    let order = src.order().unwrap() as usize;
    let image: Vec<usize> = (0..order).map(|i| dst.encode(&src.project(&src.decode(i), m))).collect();
    Ok(GraphMorphism {
        vertex_map: (0..order * nv).map(|w| image[w / nv] * nv + w % nv).collect(),
        edge_map: (0..order * ne).map(|f| image[f / ne] * ne + f % ne).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spanning::spanning_tree_count;
    use proptest::prelude::*;

    fn bouquet_spec(ell: u64, alpha: Vec<Vec<i64>>) -> VoltageSpec {
        let g = MultiGraph::build(1, &vec![(0, 0); alpha.len()]).unwrap();
        let d = alpha[0].len();
        VoltageSpec::with_default_section(g, alpha, ell, d).unwrap()
    }

    fn example1() -> VoltageSpec {
        bouquet_spec(2, vec![vec![1, 0], vec![0, 1]])
    }

    #[test]
    fn sections() {
        let b = MultiGraph::build(1, &[(0, 0), (0, 0)]).unwrap();
        assert_eq!(default_section(&b).edges(), &[0, 2]);
        let d = MultiGraph::build(2, &[(0, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(default_section(&d).len(), 3);
        assert!(Section::new(&d, vec![1, 2, 5]).is_ok());
        assert!(Section::new(&d, vec![0, 0, 4]).is_err());
    }

    #[test]
    fn reduction_examples() {
        let s = bouquet_spec(2, vec![vec![1, 5], vec![-1, 0]]);
        assert_eq!(reduce_voltage(&s, 2), vec![vec![1, 1], vec![3, 0]]);
        assert_eq!(reduce_voltage(&s, 0), vec![vec![0, 0], vec![0, 0]]);
        let t = bouquet_spec(3, vec![vec![2, 3]]);
        assert_eq!(reduce_voltage(&t, 1), vec![vec![2, 0]]);
    }

    #[test]
    fn spec_rejects_bad_input() {
        let g = MultiGraph::build(1, &[(0, 0)]).unwrap();
        assert!(matches!(
            VoltageSpec::with_default_section(g.clone(), vec![vec![1]], 4, 1),
            Err(Error::NotPrime(4))
        ));
        assert!(VoltageSpec::with_default_section(g.clone(), vec![vec![1, 2]], 2, 1).is_err());
        assert!(VoltageSpec::with_default_section(g, vec![], 2, 1).is_err());
        assert!(matches!(VoltageSpec::parse_json("{"), Err(Error::Parse(_))));
        assert!(matches!(
            VoltageSpec::parse_json(r#"{"graph":{"vertices":1,"edges":[[0,0]]},"ell":2,"d":1,"alpha":[[1]],"x":0}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"graph":{"vertices":1,"edges":[[0,0],[0,0]]},"ell":2,"d":2,"alpha":[[1,0],[0,1]]}"#;
        let s = VoltageSpec::parse_json(text).unwrap();
        assert_eq!(s, example1());
        assert_eq!(serde_json::to_string(&s.to_json()).unwrap(), text);
    }

    #[test]
    fn example1_first_layer_is_doubled_four_cycle() {
        let x1 = derived_graph(&example1(), 1, 3000).unwrap();
        let g = x1.graph();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.undirected_edge_count(), 8);
        assert!((0..4).all(|v| g.valency(v) == 4));
        assert!(g.matrices().adjacency.iter().flatten().all(|&a| a == 0 || a == 2));
        assert_eq!(spanning_tree_count(g).unwrap(), 32.into());

        let x0 = derived_graph(&example1(), 0, 3000).unwrap();
        assert_eq!(x0.graph(), example1().base());
    }

    #[test]
    fn example4_first_layer() {
        let s = bouquet_spec(3, vec![vec![1, 0], vec![0, 1]]);
        let g = derived_graph(&s, 1, 3000).unwrap().into_graph();
        assert_eq!((g.vertex_count(), g.undirected_edge_count()), (9, 18));
        assert!((0..9).all(|v| g.valency(v) == 4));
    }

    #[test]
    fn budget_and_disconnection() {
        assert!(matches!(
            derived_graph(&example1(), 5, 1000),
            Err(Error::OverBudget { layer: 5, vertices: 1024, budget: 1000 })
        ));
        let s = bouquet_spec(2, vec![vec![2, 0], vec![0, 1]]);
        assert!(matches!(derived_graph(&s, 1, 3000), Err(Error::DisconnectedLayer { layer: 1 })));
        assert!(layer_vertex_count(&example1(), 200) == u128::MAX);
    }

    #[test]
    fn connectivity_examples() {
        let c = check_tower_connectivity(&example1());
        assert!(c.connected);
        assert_eq!(c.rank, 2);
        let bad = check_tower_connectivity(&bouquet_spec(2, vec![vec![2, 0], vec![0, 1]]));
        assert!(!bad.connected);
        assert_eq!(bad.rank, 1);
        let ex3 = bouquet_spec(2, vec![vec![1, 5], vec![0, 3], vec![1, 2], vec![0, 1]]);
        assert!(check_tower_connectivity(&ex3).connected);
        let err = bouquet_spec(2, vec![vec![2, 0], vec![0, 2]]).validate().unwrap_err();
        assert_eq!(err.to_string(), "invalid voltage data: voltages do not generate mod 2");
    }

    #[test]
    fn projection_examples() {
        let s = example1();
        let x2 = derived_graph(&s, 2, 3000).unwrap();
        let x1 = derived_graph(&s, 1, 3000).unwrap();
        let p = intermediate_projection(&s, 2, 1, 3000).unwrap();
        assert!(p.is_covering(x2.graph(), x1.graph()));
        for w in 0..4 {
            assert_eq!(p.vertex_map.iter().filter(|&&v| v == w).count(), 4);
        }
        let p10 = intermediate_projection(&s, 1, 0, 3000).unwrap();
        assert!(p10.is_covering(x1.graph(), s.base()));
    }

    #[test]
    fn dot_colors_fibers() {
        let s = bouquet_spec(2, vec![vec![1, 0], vec![0, 1]]);
        let dot = derived_graph(&s, 1, 3000).unwrap().to_dot("x1");
        assert!(dot.starts_with("graph x1 {"));
        assert!(dot.contains("label=\"0|1,1\""));
        assert_eq!(dot.matches(" -- ").count(), 8);
    }

    prop_compose! {
        fn arb_spec()(n in 1usize..4, ell in prop_oneof![Just(2u64), Just(3)], d in 1usize..3)
            (chain in proptest::collection::vec(0usize..100, n),
             extra in proptest::collection::vec((0..n, 0..n), 1..4),
             alpha in proptest::collection::vec(proptest::collection::vec(-5i64..6, d), n + 3),
             n in Just(n), ell in Just(ell), d in Just(d)) -> VoltageSpec {
            let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (chain[v] % v, v)).collect();
            edges.extend(extra);
            let alpha = alpha[..edges.len()].to_vec();
            VoltageSpec::with_default_section(MultiGraph::build(n, &edges).unwrap(), alpha, ell, d).unwrap()
        }
    }

    proptest! {
        #[test]
        fn derived_layers_are_covers(spec in arb_spec(), layer in 1u32..3) {
            let x = derived_graph_unchecked(&spec, layer);
            let g = x.graph();
            let size = LayerGroup::new(spec.ell(), layer, spec.d()).order().unwrap() as usize;
            prop_assert_eq!(g.vertex_count(), size * spec.base().vertex_count());
            prop_assert_eq!(g.undirected_edge_count(), size * spec.base().undirected_edge_count());
            prop_assert_eq!(g.euler_characteristic(), size as i64 * spec.base().euler_characteristic());
            let p = intermediate_projection(&spec, layer, 0, u64::MAX).unwrap();
            prop_assert!(p.is_covering(g, spec.base()));
            // n -> n-1 -> 0 equals n -> 0
            let down = intermediate_projection(&spec, layer, layer - 1, u64::MAX).unwrap();
            let rest = intermediate_projection(&spec, layer - 1, 0, u64::MAX).unwrap();
            prop_assert_eq!(down.compose(&rest), p);
        }

        #[test]
        fn deck_transformations(spec in arb_spec(), pick in 0usize..1000) {
            let x = derived_graph_unchecked(&spec, 1);
            let group = x.group();
            let tau = group.decode(pick % group.order().unwrap() as usize);
            let shift = |w: usize, label: (usize, Vec<u64>), is_edge: bool| {
                let _ = w;
                let sigma = group.add(&tau, &label.1);
                if is_edge { x.edge_id(label.0, &sigma) } else { x.vertex_id(label.0, &sigma) }
            };
            let g = x.graph();
            let deck = GraphMorphism {
                vertex_map: (0..g.vertex_count()).map(|w| shift(w, x.vertex_label(w), false)).collect(),
                edge_map: (0..g.directed_edge_count()).map(|f| shift(f, x.edge_label(f), true)).collect(),
            };
            prop_assert!(deck.is_covering(g, g));
            let p = intermediate_projection(&spec, 1, 0, u64::MAX).unwrap();
            prop_assert_eq!(deck.compose(&p), p);
        }

        #[test]
        fn connectivity_criterion_matches_search(spec in arb_spec(), layer in 1u32..3) {
            prop_assume!(spec.base().is_connected());
            let predicted = check_tower_connectivity(&spec).connected;
            let x = derived_graph_unchecked(&spec, layer);
            prop_assert_eq!(predicted, x.graph().is_connected());
        }

        #[test]
        fn section_choice_is_invisible(spec in arb_spec(), flips in proptest::collection::vec(any::<bool>(), 8)) {
            // The same voltage function on directed edges, presented on another section.
            let base = spec.base().clone();
            let chosen: Vec<usize> = spec.section().edges().iter().enumerate()
                .map(|(i, &e)| if flips[i % 8] { base.inverse(e) } else { e })
                .collect();
            let alpha = chosen.iter().map(|&e| spec.voltage(e).to_vec()).collect();
            let other = VoltageSpec::new(base.clone(), Section::new(&base, chosen).unwrap(),
                                         alpha, spec.ell(), spec.d()).unwrap();
            prop_assert_eq!(other.to_json(), spec.to_json());
            let (x, y) = (derived_graph_unchecked(&spec, 1), derived_graph_unchecked(&other, 1));
            prop_assert_eq!(x.graph(), y.graph());
        }
    }
}
