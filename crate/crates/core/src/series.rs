//! The power series `Q(T) = det(D - A_rho)` in `d` variables, where
//! `rho(b) = (1 - T_1)^(b_1) ... (1 - T_d)^(b_d)`.
//!
//! Two representations are kept apart on purpose. [`TruncatedSeries`] expands
//! in the `T_i` up to a total degree and is used to inspect coefficients and
//! the `d = 1` invariants. [`LaurentPoly`] keeps the determinant exact as a
//! Laurent polynomial in `z_i = 1 - T_i`; substituting `z_i -> zeta^(a_i)`
//! evaluates `Q` at a classical point with no truncation at all.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::cyclotomic::{CycInt, Level};
use crate::error::{Error, Result};
use crate::ring::{berkowitz_det, RingElem};
use crate::spanning::ord_prime;
use crate::voltage::VoltageSpec;

/// A power series in `d` variables known up to total degree `trunc`.
/// `exact` records that no term was ever discarded, so the stored
/// polynomial is the series itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    d: usize,
    trunc: u32,
    coeffs: BTreeMap<Vec<u32>, BigInt>,
    exact: bool,
}

impl TruncatedSeries {
    pub fn zero(d: usize, trunc: u32) -> Self {
        TruncatedSeries {
            d,
            trunc,
            coeffs: BTreeMap::new(),
            exact: true,
        }
    }

    pub fn constant(d: usize, trunc: u32, c: impl Into<BigInt>) -> Self {
        let mut s = TruncatedSeries::zero(d, trunc);
        s.add_term(vec![0; d], c.into());
        s
    }

    /// Builds a series from terms; terms above the bound are dropped and
    /// mark the result inexact.
    pub fn from_terms(d: usize, trunc: u32, terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>) -> Self {
        let mut s = TruncatedSeries::zero(d, trunc);
        for (e, c) in terms {
            assert_eq!(e.len(), d);
            s.add_term(e, c);
        }
        s
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if Zero::is_zero(&c) {
            return;
        }
        if e.iter().sum::<u32>() > self.trunc {
            self.exact = false;
            return;
        }
        let slot = self.coeffs.entry(e.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if Zero::is_zero(slot) {
            self.coeffs.remove(&e);
        }
    }

    pub fn variables(&self) -> usize {
        self.d
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Nonzero coefficients keyed by exponent vector.
    pub fn coeffs(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.coeffs
    }

    pub fn coeff(&self, e: &[u32]) -> BigInt {
        self.coeffs.get(e).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Keeps only total degree `<= trunc`.
    pub fn truncate(&self, trunc: u32) -> Self {
        let mut s = TruncatedSeries::zero(self.d, trunc.min(self.trunc));
        s.exact = self.exact;
        for (e, c) in &self.coeffs {
            s.add_term(e.clone(), c.clone());
        }
        s
    }

    /// Lowest total degree carrying a nonzero coefficient.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().map(|e| e.iter().sum()).min()
    }

    /// The homogeneous part of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> BTreeMap<Vec<u32>, BigInt> {
        self.coeffs
            .iter()
            .filter(|(e, _)| e.iter().sum::<u32>() == k)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect()
    }

    /// JSON-friendly dump: exponent tuple rendered as `"i,j"`, integers as strings.
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            variables: self.d,
            truncation: self.trunc,
            exact: self.exact,
            coefficients: self
                .coeffs
                .iter()
                .map(|(e, c)| {
                    let key = e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                    (key, c.to_string())
                })
                .collect(),
        }
    }

    fn check(&self, rhs: &Self) {
        assert_eq!(self.d, rhs.d, "series in different numbers of variables");
        assert_eq!(self.trunc, rhs.trunc, "series truncated at different degrees");
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesJson {
    pub variables: usize,
    pub truncation: u32,
    pub exact: bool,
    pub coefficients: BTreeMap<String, String>,
}

impl RingElem for TruncatedSeries {
    fn zero_like(&self) -> Self {
        TruncatedSeries::zero(self.d, self.trunc)
    }
    fn one_like(&self) -> Self {
        TruncatedSeries::constant(self.d, self.trunc, 1)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.exact
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let mut out = self.clone();
        out.exact &= rhs.exact;
        for (e, c) in &rhs.coeffs {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.plus(&rhs.negated())
    }
    fn times(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let mut acc: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        let mut exact = self.exact && rhs.exact;
        // Inexact factors are only known to degree trunc; products stay valid to trunc.
        for (ea, ca) in &self.coeffs {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &rhs.coeffs {
                if da + eb.iter().sum::<u32>() > self.trunc {
                    exact = false;
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !Zero::is_zero(c));
        if self.coeffs.is_empty() && self.exact || rhs.coeffs.is_empty() && rhs.exact {
            exact = true;
        }
        TruncatedSeries {
            d: self.d,
            trunc: self.trunc,
            coeffs: acc,
            exact,
        }
    }
    fn negated(&self) -> Self {
        TruncatedSeries {
            d: self.d,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|(e, c)| (e.clone(), -c)).collect(),
            exact: self.exact,
        }
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// `(1 - T_i)^a` in one variable, truncated.
fn rho_factor(d: usize, i: usize, a: i64, trunc: u32) -> TruncatedSeries {
    let unit = |j: u32| {
        let mut e = vec![0; d];
        e[i] = j;
        e
    };
    let mut s = TruncatedSeries::zero(d, trunc);
    if a >= 0 {
        for j in 0..=a as u64 {
            let c = binomial(a as u64, j);
            let c = if j % 2 == 1 { -c } else { c };
            s.add_term(unit(j as u32), c);
        }
    } else {
        // (1 - T)^(-m) = sum_j C(m + j - 1, j) T^j
        let m = (-a) as u64;
        for j in 0..=trunc as u64 {
            s.add_term(unit(j as u32), binomial(m + j - 1, j));
        }
        s.exact = false;
    }
    s
}

/// `rho(a) = prod_i (1 - T_i)^(a_i)` to total degree `trunc`.
pub fn rho_series(a: &[i64], trunc: u32) -> TruncatedSeries {
    let d = a.len();
    a.iter()
        .enumerate()
        .fold(TruncatedSeries::constant(d, trunc, 1), |acc, (i, &ai)| {
            acc.times(&rho_factor(d, i, ai, trunc))
        })
}

/// `2 * (largest |alpha|_1 over section edges) * ell + 8`.
pub fn default_truncation(spec: &VoltageSpec) -> u32 {
    let max_l1 = spec
        .alpha()
        .iter()
        .map(|a| a.iter().map(|x| x.unsigned_abs()).sum::<u64>())
        .max()
        .unwrap_or(0);
    (2 * max_l1 * spec.ell() + 8) as u32
}

/// `Q(T) = det(D - A_rho)` truncated at total degree `trunc`.
pub fn q_series(spec: &VoltageSpec, trunc: u32) -> TruncatedSeries {
    let base = spec.base();
    let nv = base.vertex_count();
    let d = spec.d();
    let mut m = vec![vec![TruncatedSeries::zero(d, trunc); nv]; nv];
    for (v, row) in m.iter_mut().enumerate() {
        row[v] = TruncatedSeries::constant(d, trunc, base.valency(v) as i64);
    }
    for e in 0..base.directed_edge_count() {
        let (o, t) = (base.origin(e), base.terminus(e));
        m[o][t] = m[o][t].minus(&rho_series(spec.voltage(e), trunc));
    }
    berkowitz_det(&m)
}

/// Laurent polynomial in `z_1, ..., z_d` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    d: usize,
    coeffs: BTreeMap<Vec<i64>, BigInt>,
}

impl LaurentPoly {
    pub fn constant(d: usize, c: impl Into<BigInt>) -> Self {
        let mut p = LaurentPoly {
            d,
            coeffs: BTreeMap::new(),
        };
        let c = c.into();
        if !Zero::is_zero(&c) {
            p.coeffs.insert(vec![0; d], c);
        }
        p
    }

    pub fn monomial(e: &[i64], c: impl Into<BigInt>) -> Self {
        let mut p = LaurentPoly::constant(e.len(), 0);
        let c = c.into();
        if !Zero::is_zero(&c) {
            p.coeffs.insert(e.to_vec(), c);
        }
        p
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<i64>, BigInt> {
        &self.coeffs
    }

    /// Substitutes `z_i -> zeta^(a_i)`.
    pub fn evaluate(&self, level: Level, a: &[i64]) -> CycInt {
        let m = level.order() as i128;
        let terms = self.coeffs.iter().map(|(e, c)| {
            let x: i128 = e.iter().zip(a).map(|(&ei, &ai)| ei as i128 * ai as i128).sum();
            (x.rem_euclid(m) as i64, c.clone())
        });
        CycInt::from_terms(level, terms)
    }

    /// Substitutes `z_i -> 1 - T_i` and expands to total degree `trunc`.
    pub fn to_series(&self, trunc: u32) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.d, trunc);
        for (e, c) in &self.coeffs {
            out = out.plus(&rho_series(e, trunc).times(&TruncatedSeries::constant(self.d, trunc, c.clone())));
        }
        out
    }
}

impl RingElem for LaurentPoly {
    fn zero_like(&self) -> Self {
        LaurentPoly::constant(self.d, 0)
    }
    fn one_like(&self) -> Self {
        LaurentPoly::constant(self.d, 1)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn plus(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.coeffs {
            *out.coeffs.entry(e.clone()).or_insert_with(BigInt::zero) += c;
        }
        out.coeffs.retain(|_, c| !Zero::is_zero(c));
        out
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.plus(&rhs.negated())
    }
    fn times(&self, rhs: &Self) -> Self {
        let mut out = self.zero_like();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &rhs.coeffs {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *out.coeffs.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        out.coeffs.retain(|_, c| !Zero::is_zero(c));
        out
    }
    fn negated(&self) -> Self {
        LaurentPoly {
            d: self.d,
            coeffs: self.coeffs.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

/// `det(D - A_rho)` exactly, as a Laurent polynomial in `z_i = 1 - T_i`.
pub fn q_laurent(spec: &VoltageSpec) -> LaurentPoly {
    let base = spec.base();
    let nv = base.vertex_count();
    let d = spec.d();
    let mut m = vec![vec![LaurentPoly::constant(d, 0); nv]; nv];
    for (v, row) in m.iter_mut().enumerate() {
        row[v] = LaurentPoly::constant(d, base.valency(v) as i64);
    }
    for e in 0..base.directed_edge_count() {
        let (o, t) = (base.origin(e), base.terminus(e));
        m[o][t] = m[o][t].minus(&LaurentPoly::monomial(spec.voltage(e), 1));
    }
    berkowitz_det(&m)
}

/// The point `t_psi = (1 - zeta^(a_1), ..., 1 - zeta^(a_d))` of the open
/// polydisk attached to the character `psi_a` at level `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalPoint {
    pub level: Level,
    pub a: Vec<i64>,
}

impl ClassicalPoint {
    pub fn new(level: Level, a: Vec<i64>) -> Self {
        ClassicalPoint { level, a }
    }

    /// The coordinates `1 - zeta^(a_i)`.
    pub fn coordinates(&self) -> Vec<CycInt> {
        self.a
            .iter()
            .map(|&ai| CycInt::from_terms(self.level, [(0, 1), (ai, -1)]))
            .collect()
    }

    /// Every nonzero coordinate has positive valuation.
    pub fn in_disk(&self) -> bool {
        self.coordinates()
            .iter()
            .all(|t| t.pi_adic_valuation().map_or(true, |v| v > 0))
    }
}

/// `Q(t_psi)`, computed by exact substitution into the Laurent form.
pub fn evaluate_at_classical_point(spec: &VoltageSpec, point: &ClassicalPoint) -> CycInt {
    q_laurent(spec).evaluate(point.level, &point.a)
}

/// Weierstrass data of a one-variable series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IwasawaInvariants {
    Certified { mu: u64, lambda: u64 },
    /// Truncation could hide a coefficient of smaller valuation; the values are
    /// those of the computed part (`mu` an upper bound).
    InsufficientPrecision { mu: u64, lambda: u64 },
}

/// `mu` = least coefficient valuation, `lambda` = least index attaining it.
///
/// Certified when the series is an exact polynomial or when `mu = 0` (a unit
/// coefficient among the computed ones already fixes both values).
pub fn iwasawa_invariants_d1(q: &TruncatedSeries, ell: u64) -> Result<IwasawaInvariants> {
    if q.variables() != 1 {
        return Err(Error::Unsupported(format!(
            "invariants need a one-variable series, got {} variables",
            q.variables()
        )));
    }
    let mut best: Option<(u64, u64)> = None;
    for (e, c) in q.coeffs() {
        let v = ord_prime(c, ell)?;
        if best.is_none_or(|(mu, _)| v < mu) {
            best = Some((v, e[0] as u64));
        }
    }
    let Some((mu, lambda)) = best else {
        return Err(Error::ZeroSeries);
    };
    Ok(if q.is_exact() || mu == 0 {
        IwasawaInvariants::Certified { mu, lambda }
    } else {
        IwasawaInvariants::InsufficientPrecision { mu, lambda }
    })
}
