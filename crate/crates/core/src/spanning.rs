//! Exact spanning-tree counts via the Matrix-Tree theorem.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;

/// A spanning-tree count together with its valuation at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeCount {
    pub kappa: BigInt,
    pub ell: u64,
    pub ord_ell: u64,
}

impl TreeCount {
    pub fn new(kappa: BigInt, ell: u64) -> Result<Self> {
        let ord_ell = ord_prime(&kappa, ell)?;
        Ok(TreeCount { kappa, ell, ord_ell })
    }
}

/// Largest `e` with `ell^e | k`. Rejects `k = 0`; the sign of `k` is ignored.
pub fn ord_prime(k: &BigInt, ell: u64) -> Result<u64> {
    if k.is_zero() {
        return Err(Error::ZeroValuation);
    }
    if ell == 2 {
        return Ok(k.trailing_zeros().unwrap_or(0));
    }
    let ell_big = BigInt::from(ell);
    let mut rest = k.clone();
    let mut e = 0;
    // Strip large blocks first so deep valuations do not cost one division each.
    let mut block = ell_big.pow(32);
    let mut block_len = 32;
    loop {
        let (q, r) = (&rest / &block, &rest % &block);
        if r.is_zero() {
            rest = q;
            e += block_len;
        } else if block_len == 1 {
            break;
        } else {
            block_len /= 2;
            block = ell_big.pow(block_len as u32);
        }
    }
    Ok(e)
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
///
/// Rows whose entry in the current pivot column is zero are not rewritten.
/// Their Bareiss update is a pure rescaling by `p_{k+1} / p_k`, and these
/// telescope, so a stale row is brought up to date in one pass
/// (`x * p_now / p_stamp`, exact) the next time it is needed. On sparse
/// matrices such as graph Laplacians this skips most of the work.
pub fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n), "matrix is not square");
    if n == 0 {
        return BigInt::one();
    }
    // pivots[k] is the divisor used during step k; pivots[0] = 1.
    let mut pivots: Vec<BigInt> = vec![BigInt::one()];
    let mut stamp = vec![0usize; n];
    let mut negate = false;

    for k in 0..n {
        refresh(&mut a[k], &mut stamp[k], k, &pivots);
        if a[k][k].is_zero() {
            let Some(i) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            refresh(&mut a[i], &mut stamp[i], k, &pivots);
            a.swap(k, i);
            stamp.swap(k, i);
            negate = !negate;
        }
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        let prev = &pivots[k];
        for (offset, row) in bottom.iter_mut().enumerate() {
            if row[k].is_zero() {
                continue;
            }
            let i = k + 1 + offset;
            refresh(row, &mut stamp[i], k, &pivots);
            let factor = std::mem::take(&mut row[k]);
            for j in k + 1..n {
                let (x, y) = (&row[j], &pivot_row[j]);
                row[j] = match (x.is_zero(), y.is_zero()) {
                    (true, true) => continue,
                    (false, true) => &(x * pivot) / prev,
                    (true, false) => -(&(&factor * y) / prev),
                    (false, false) => &(x * pivot - &factor * y) / prev,
                };
            }
            stamp[i] = k + 1;
        }
        let next = top[k][k].clone();
        pivots.push(next);
    }
    let det = pivots.pop().unwrap();
    if negate {
        -det
    } else {
        det
    }
}

fn refresh(row: &mut [BigInt], stamp: &mut usize, k: usize, pivots: &[BigInt]) {
    if *stamp == k {
        return;
    }
    let (num, den) = (&pivots[k], &pivots[*stamp]);
    for x in row.iter_mut() {
        if !x.is_zero() {
            *x = &(&*x * num) / den;
        }
    }
    *stamp = k;
}

/// Laplacian `D - A` with row and column `deleted` removed.
pub fn reduced_laplacian(g: &MultiGraph, deleted: usize) -> Vec<Vec<BigInt>> {
    let n = g.vertex_count();
    let index = |v: usize| if v < deleted { Some(v) } else if v == deleted { None } else { Some(v - 1) };
    let mut l = vec![vec![BigInt::zero(); n - 1]; n - 1];
    for e in 0..g.directed_edge_count() {
        let (o, t) = (g.origin(e), g.terminus(e));
        if o == t {
            continue;
        }
        if let Some(i) = index(o) {
            l[i][i] += 1;
            if let Some(j) = index(t) {
                l[i][j] -= 1;
            }
        }
    }
    l
}

/// Reverse Cuthill-McKee order: breadth-first from a low-valency vertex,
/// neighbours by increasing valency, reversed. Keeps the Laplacian banded so
/// elimination fills in little.
pub fn bandwidth_order(g: &MultiGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in 0..g.directed_edge_count() {
        let (o, t) = (g.origin(e), g.terminus(e));
        if o != t {
            nbrs[o].push(t);
        }
    }
    for list in nbrs.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree = |v: usize| nbrs[v].len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n).filter(|&v| !seen[v]).min_by_key(|&v| (degree(v), v)).unwrap();
        seen[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = nbrs[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                seen[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// Reduced Laplacian with rows and columns in the given vertex order, the
/// first vertex of the order deleted.
fn reduced_laplacian_ordered(g: &MultiGraph, order: &[usize]) -> Vec<Vec<BigInt>> {
    let n = g.vertex_count();
    let mut position = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut l = vec![vec![BigInt::zero(); n - 1]; n - 1];
    for e in 0..g.directed_edge_count() {
        let (o, t) = (position[g.origin(e)], position[g.terminus(e)]);
        if o == t || o == 0 {
            continue;
        }
        l[o - 1][o - 1] += 1;
        if t != 0 {
            l[o - 1][t - 1] -= 1;
        }
    }
    l
}

/// Number of spanning trees, as the determinant of a reduced Laplacian.
/// Disconnected graphs are rejected.
pub fn spanning_tree_count(g: &MultiGraph) -> Result<BigInt> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let kappa = bareiss_det(reduced_laplacian_ordered(g, &bandwidth_order(g)));
    if kappa.sign() != Sign::Plus {
        return Err(Error::Inconsistent(format!(
            "reduced Laplacian determinant {kappa} of a connected graph"
        )));
    }
    Ok(kappa)
}

pub fn kappa_matrix_tree(g: &MultiGraph, ell: u64) -> Result<TreeCount> {
    TreeCount::new(spanning_tree_count(g)?, ell)
}
