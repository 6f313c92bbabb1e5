//! Minimal commutative-ring abstraction shared by the integer, cyclotomic,
//! power-series and polynomial layers, plus a division-free determinant.
//!
//! Elements carry their own context (a cyclotomic level, a truncation bound),
//! so zero and one are produced from an existing element rather than from a
//! static constructor.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub trait RingElem: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
}

impl RingElem for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
}

/// Determinant of a square matrix by Berkowitz's algorithm.
///
/// Uses only ring operations (no division), so it works over the cyclotomic
/// integers, truncated power series and polynomial rings alike. Cost is
/// `O(n^4)` ring multiplications; intended for base-graph sized matrices.
///
/// Panics on an empty or non-square matrix.
pub fn berkowitz_det<R: RingElem>(m: &[Vec<R>]) -> R {
    let n = m.len();
    assert!(n > 0, "determinant of an empty matrix");
    assert!(m.iter().all(|row| row.len() == n), "matrix is not square");
    let one = m[0][0].one_like();

    // Characteristic polynomial coefficients of the leading r x r block,
    // highest degree first: v[0] = 1.
    let mut v = vec![one.clone(), m[0][0].negated()];
    for r in 1..n {
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(one.clone());
        toeplitz.push(m[r][r].negated());
        let mut x: Vec<R> = (0..r).map(|i| m[i][r].clone()).collect();
        for j in 0..r {
            let mut dot = m[0][0].zero_like();
            for (k, xk) in x.iter().enumerate() {
                if !m[r][k].is_zero() && !xk.is_zero() {
                    dot = dot.plus(&m[r][k].times(xk));
                }
            }
            toeplitz.push(dot.negated());
            if j + 1 < r {
                x = (0..r)
                    .map(|i| {
                        let mut acc = m[0][0].zero_like();
                        for (k, xk) in x.iter().enumerate() {
                            if !m[i][k].is_zero() && !xk.is_zero() {
                                acc = acc.plus(&m[i][k].times(xk));
                            }
                        }
                        acc
                    })
                    .collect();
            }
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = m[0][0].zero_like();
            for (k, vk) in v.iter().enumerate().take(i + 1) {
                let t = &toeplitz[i - k];
                if !t.is_zero() && !vk.is_zero() {
                    acc = acc.plus(&t.times(vk));
                }
            }
            next.push(acc);
        }
        v = next;
    }
    if n.is_multiple_of(2) {
        v[n].clone()
    } else {
        v[n].negated()
    }
}

/// Dense univariate polynomial over a ring, lowest degree first, without
/// trailing zeros. `zero` is a prototype coefficient carrying the context.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<R> {
    coeffs: Vec<R>,
    zero: R,
}

impl<R: RingElem> Poly<R> {
    pub fn new(mut coeffs: Vec<R>, zero: R) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs, zero }
    }

    pub fn constant(c: R) -> Self {
        let zero = c.zero_like();
        Poly::new(vec![c], zero)
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    /// Coefficient of `u^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> R {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.zero.clone())
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn map<S: RingElem>(&self, zero: S, f: impl Fn(&R) -> S) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(f).collect(), zero)
    }
}

impl<R: RingElem> RingElem for Poly<R> {
    fn zero_like(&self) -> Self {
        Poly::new(Vec::new(), self.zero.clone())
    }
    fn one_like(&self) -> Self {
        Poly::new(vec![self.zero.one_like()], self.zero.clone())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn plus(&self, rhs: &Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i).plus(&rhs.coeff(i))).collect();
        Poly::new(coeffs, self.zero.clone())
    }
    fn minus(&self, rhs: &Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i).minus(&rhs.coeff(i))).collect();
        Poly::new(coeffs, self.zero.clone())
    }
    fn times(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return self.zero_like();
        }
        let mut out = vec![self.zero.clone(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].plus(&a.times(b));
                }
            }
        }
        Poly::new(out, self.zero.clone())
    }
    fn negated(&self) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.negated()).collect(), self.zero.clone())
    }
}

impl Poly<BigInt> {
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect(), BigInt::zero())
    }

    pub fn eval(&self, u: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * u + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        Poly::new(coeffs, BigInt::zero())
    }
}
