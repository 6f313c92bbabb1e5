//! Finite multigraphs given by paired directed edges with an inversion map.
//!
//! Every undirected edge is stored as two directed edges `e` and `bar(e)`
//! with `o(e) = t(bar(e))`. Loops and parallel edges are allowed.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{berkowitz_det, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    vertex_count: usize,
    origin: Vec<usize>,
    terminus: Vec<usize>,
    inverse: Vec<usize>,
}

/// On-disk graph form: `{"vertices": N, "edges": [[i, j], ...]}`, a loop is `[i, i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

impl MultiGraph {
    /// Builds a graph from undirected edges. Edge `i` becomes directed edge
    /// `2i` from `a` to `b` and its inverse `2i + 1`.
    pub fn build(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 || edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut origin = Vec::with_capacity(2 * edges.len());
        let mut terminus = Vec::with_capacity(2 * edges.len());
        let mut inverse = Vec::with_capacity(2 * edges.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        index: v,
                        vertex_count,
                    });
                }
            }
            origin.extend([a, b]);
            terminus.extend([b, a]);
            inverse.extend([2 * i + 1, 2 * i]);
        }
        Ok(MultiGraph {
            vertex_count,
            origin,
            terminus,
            inverse,
        })
    }

    /// Assembles a graph from raw incidence and inversion tables, checking the
    /// involution and incidence invariants.
    pub fn from_parts(
        vertex_count: usize,
        origin: Vec<usize>,
        terminus: Vec<usize>,
        inverse: Vec<usize>,
    ) -> Result<Self> {
        let m = origin.len();
        if vertex_count == 0 || m == 0 {
            return Err(Error::EmptyGraph);
        }
        if terminus.len() != m || inverse.len() != m {
            return Err(Error::Inconsistent("edge tables differ in length".into()));
        }
        for e in 0..m {
            let b = inverse[e];
            if b >= m || b == e || inverse[b] != e {
                return Err(Error::Inconsistent(format!(
                    "inversion is not a fixed-point-free involution at edge {e}"
                )));
            }
            if origin[e] >= vertex_count || terminus[e] >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    index: origin[e].max(terminus[e]),
                    vertex_count,
                });
            }
            if origin[e] != terminus[b] {
                return Err(Error::Inconsistent(format!(
                    "o(e) != t(bar e) at edge {e}"
                )));
            }
        }
        Ok(MultiGraph {
            vertex_count,
            origin,
            terminus,
            inverse,
        })
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = json.edges.iter().map(|&[a, b]| (a, b)).collect();
        MultiGraph::build(json.vertices, &edges)
    }

    /// The undirected edge list, one entry per inversion orbit, keyed by the
    /// smaller directed edge id.
    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertex_count,
            edges: self
                .undirected_edges()
                .map(|e| [self.origin[e], self.terminus[e]])
                .collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn directed_edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.origin.len() / 2
    }

    pub fn origin(&self, e: usize) -> usize {
        self.origin[e]
    }

    pub fn terminus(&self, e: usize) -> usize {
        self.terminus[e]
    }

    pub fn inverse(&self, e: usize) -> usize {
        self.inverse[e]
    }

    /// Directed edges with the smaller id of their orbit, in id order.
    pub fn undirected_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.directed_edge_count()).filter(move |&e| e < self.inverse[e])
    }

    /// Directed edges starting at `v`.
    pub fn edges_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.directed_edge_count()).filter(move |&e| self.origin[e] == v)
    }

    pub fn valency(&self, v: usize) -> usize {
        self.origin.iter().filter(|&&o| o == v).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.undirected_edge_count() as i64
    }

    /// True when the graph is a single vertex carrying only loops.
    pub fn is_bouquet(&self) -> bool {
        self.vertex_count == 1
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_tree().0.iter().all(|p| p.is_some())
    }

    /// Breadth-first spanning forest from vertex 0. Returns, per vertex, the
    /// directed edge used to reach it (`Some(None)` for the root, `None` when
    /// unreached), and the visiting order.
    pub(crate) fn bfs_tree(&self) -> (Vec<Option<Option<usize>>>, Vec<usize>) {
        let mut out_edges = vec![Vec::new(); self.vertex_count];
        for e in 0..self.directed_edge_count() {
            out_edges[self.origin[e]].push(e);
        }
        let mut parent = vec![None; self.vertex_count];
        let mut order = Vec::with_capacity(self.vertex_count);
        parent[0] = Some(None);
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &e in &out_edges[v] {
                let w = self.terminus[e];
                if parent[w].is_none() {
                    parent[w] = Some(Some(e));
                    queue.push_back(w);
                }
            }
        }
        (parent, order)
    }

    pub fn matrices(&self) -> GraphMatrices {
        let n = self.vertex_count;
        let mut adjacency = vec![vec![0i64; n]; n];
        for e in 0..self.directed_edge_count() {
            adjacency[self.origin[e]][self.terminus[e]] += 1;
        }
        let degree = (0..n).map(|v| adjacency[v].iter().sum()).collect();
        GraphMatrices {
            adjacency,
            degree,
            euler_char: self.euler_characteristic(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            connected: self.is_connected(),
            min_valency: (0..self.vertex_count)
                .map(|v| self.valency(v))
                .min()
                .unwrap_or(0),
            euler_characteristic: self.euler_characteristic(),
        }
    }

    /// `h_X(u) = det(I - A u + (D - I) u^2)`.
    pub fn ihara_h(&self) -> IharaHPolynomial {
        let m = self.matrices();
        let n = self.vertex_count;
        let rows: Vec<Vec<Poly<BigInt>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let a = m.adjacency[i][j];
                        if i == j {
                            Poly::from_ints(&[1, -a, m.degree[i] - 1])
                        } else {
                            Poly::from_ints(&[0, -a])
                        }
                    })
                    .collect()
            })
            .collect();
        IharaHPolynomial(berkowitz_det(&rows))
    }

    /// Undirected DOT rendering; each undirected edge is one DOT edge so
    /// multiplicities show as parallel edges.
    pub fn to_dot(&self, name: &str) -> String {
        self.to_dot_with(name, |_| String::new())
    }

    pub(crate) fn to_dot_with(&self, name: &str, vertex_attrs: impl Fn(usize) -> String) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.vertex_count {
            let attrs = vertex_attrs(v);
            if attrs.is_empty() {
                let _ = writeln!(out, "  {v};");
            } else {
                let _ = writeln!(out, "  {v} [{attrs}];");
            }
        }
        for e in self.undirected_edges() {
            let _ = writeln!(out, "  {} -- {};", self.origin[e], self.terminus[e]);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMatrices {
    pub adjacency: Vec<Vec<i64>>,
    /// Diagonal of the degree matrix.
    pub degree: Vec<i64>,
    pub euler_char: i64,
}

impl GraphMatrices {
    /// `D - A`; loops cancel on the diagonal.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        let n = self.degree.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = if i == j { self.degree[i] } else { 0 };
                        d - self.adjacency[i][j]
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub connected: bool,
    pub min_valency: usize,
    pub euler_characteristic: i64,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.connected {
            out.push("graph is disconnected".to_string());
        }
        if self.min_valency < 2 {
            out.push(format!(
                "graph has a vertex of valency {} (at least 2 required)",
                self.min_valency
            ));
        }
        if self.euler_characteristic == 0 {
            out.push("Euler characteristic is 0".to_string());
        }
        out
    }

    pub fn into_result(self) -> Result<()> {
        match self.failures().first() {
            None => Ok(()),
            Some(reason) => Err(Error::InvalidBase(reason.clone())),
        }
    }
}

/// The Ihara polynomial `h_X(u)`, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq)]
pub struct IharaHPolynomial(pub Poly<BigInt>);

impl IharaHPolynomial {
    pub fn coefficients(&self) -> &[BigInt] {
        self.0.coeffs()
    }

    pub fn eval(&self, u: i64) -> BigInt {
        self.0.eval(&BigInt::from(u))
    }

    /// `h_X'(1)`.
    pub fn derivative_at_one(&self) -> BigInt {
        self.0.derivative().eval(&BigInt::from(1))
    }

    pub fn vanishes_at_one(&self) -> bool {
        self.eval(1).is_zero()
    }
}
