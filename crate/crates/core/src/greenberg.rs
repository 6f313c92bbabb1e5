//! Valuation sequences `ord_ell(kappa_n)` and exact fits of the form
//! `P(ell^n, n)` with `P` of total degree at most `d` and degree at most one
//! in `Y`.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::artin::{kappa_via_lfunctions, level_valuation, ord_kappa_base};
use crate::error::{Error, Result};
use crate::spanning::kappa_matrix_tree;
use crate::voltage::{derived_graph, layer_vertex_count, VoltageSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Route {
    #[serde(rename = "l-function")]
    LFunction,
    #[serde(rename = "matrix-tree")]
    MatrixTree,
    #[serde(rename = "both")]
    Both,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::LFunction => "l-function",
            Route::MatrixTree => "matrix-tree",
            Route::Both => "both",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceEntry {
    pub n: u32,
    pub ord: u64,
    pub route: Route,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationSequence {
    pub ell: u64,
    pub d: usize,
    pub entries: Vec<SequenceEntry>,
}

impl ValuationSequence {
    /// A sequence of known values for `n = first, first + 1, ...`.
    pub fn from_values(ell: u64, d: usize, first: u32, values: &[u64]) -> Self {
        ValuationSequence {
            ell,
            d,
            entries: values
                .iter()
                .enumerate()
                .map(|(i, &ord)| SequenceEntry {
                    n: first + i as u32,
                    ord,
                    route: Route::LFunction,
                })
                .collect(),
        }
    }

    pub fn values(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.ord).collect()
    }
}

/// `ord_ell(kappa_n)` for `n = 1..=n_max` (only `n = 0` when `n_max = 0`).
///
/// Every layer goes through the L-function route. Layers with at most
/// `budget` vertices are also built explicitly and their full `kappa_n`
/// compared with the product formula; any disagreement is an error.
pub fn valuation_sequence(spec: &VoltageSpec, n_max: u32, budget: u64) -> Result<ValuationSequence> {
    valuation_sequence_timed(spec, n_max, budget).map(|(seq, _)| seq)
}

/// As [`valuation_sequence`], with the wall time spent on each entry.
pub fn valuation_sequence_timed(
    spec: &VoltageSpec,
    n_max: u32,
    budget: u64,
) -> Result<(ValuationSequence, Vec<Duration>)> {
    spec.validate()?;
    let start = Instant::now();
    let base = ord_kappa_base(spec.base(), spec.ell())?;
    let mut entries = Vec::new();
    let mut times = Vec::new();
    if n_max == 0 {
        entries.push(SequenceEntry {
            n: 0,
            ord: base,
            route: Route::LFunction,
        });
        times.push(start.elapsed());
    }
    let mut acc = base as i128;
    for n in 1..=n_max {
        let start = Instant::now();
        acc += level_valuation(spec, n)? as i128 - spec.d() as i128;
        if acc < 0 {
            return Err(Error::Inconsistent(format!("negative valuation {acc} at n = {n}")));
        }
        let ord = acc as u64;
        let mut route = Route::LFunction;
        if layer_vertex_count(spec, n) <= budget as u128 {
            let mt = kappa_matrix_tree(derived_graph(spec, n, budget)?.graph(), spec.ell())?;
            let lf = kappa_via_lfunctions(spec, n)?;
            if mt != lf || mt.ord_ell != ord {
                return Err(Error::RouteMismatch {
                    n,
                    matrix_tree: mt.kappa.to_string(),
                    l_function: format!("{} (ord {ord})", lf.kappa),
                });
            }
            route = Route::Both;
        }
        entries.push(SequenceEntry { n, ord, route });
        times.push(start.elapsed());
    }
    let seq = ValuationSequence {
        ell: spec.ell(),
        d: spec.d(),
        entries,
    };
    Ok((seq, times))
}

/// The monomial `Y^j X^k`, evaluated at `X = ell^n`, `Y = n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Monomial {
    pub k: u32,
    pub j: u32,
}

impl Monomial {
    pub fn eval(&self, ell: u64, n: u32) -> BigInt {
        let x = BigInt::from(ell).pow(self.k * n);
        if self.j == 1 {
            x * BigInt::from(n)
        } else {
            x
        }
    }

    /// `X^2`, `Y*X`, `1`, ...
    pub fn name(&self) -> String {
        let x = match self.k {
            0 => String::new(),
            1 => "X".to_string(),
            k => format!("X^{k}"),
        };
        match (self.j, x.is_empty()) {
            (0, true) => "1".to_string(),
            (0, false) => x,
            (_, true) => "Y".to_string(),
            (_, false) => format!("Y*{x}"),
        }
    }
}

/// `X^d, Y X^(d-1), X^(d-1), ..., X, Y, 1`: total degree at most `d`, at most
/// linear in `Y`. For `d = 2` these are the five unknowns `a, b, c, d, e`.
pub fn monomial_basis(d: usize) -> Vec<Monomial> {
    let d = d as u32;
    let mut out = Vec::with_capacity(2 * d as usize + 1);
    for k in (0..=d).rev() {
        out.push(Monomial { k, j: 0 });
        if k >= 1 {
            out.push(Monomial { k: k - 1, j: 1 });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreenbergFit {
    pub ell: u64,
    pub d: usize,
    pub coefficients: Vec<(Monomial, BigRational)>,
    /// First and last `n` of the window the system was solved on.
    pub window: (u32, u32),
}

impl GreenbergFit {
    pub fn coefficient(&self, m: Monomial) -> BigRational {
        self.coefficients
            .iter()
            .find(|(x, _)| *x == m)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// `P(ell^n, n)`.
    pub fn eval(&self, n: u32) -> BigRational {
        self.coefficients
            .iter()
            .map(|(m, c)| c * BigRational::from_integer(m.eval(self.ell, n)))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Whether the coefficients of `X^d` and `Y X^(d-1)` are nonnegative integers.
    pub fn leading_coefficients_integral(&self) -> bool {
        let d = self.d as u32;
        [Monomial { k: d, j: 0 }, Monomial { k: d - 1, j: 1 }]
            .iter()
            .all(|&m| {
                let c = self.coefficient(m);
                c.is_integer() && !c.is_negative()
            })
    }

    /// Human-readable `P(ell^n, n)`, e.g. `4·3^n − 2n − 4`.
    pub fn formula(&self) -> String {
        let mut out = String::new();
        for (m, c) in &self.coefficients {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            if out.is_empty() {
                if negative {
                    out.push('−');
                }
            } else {
                out.push_str(if negative { " − " } else { " + " });
            }
            out.push_str(&term(m, &c.abs(), self.ell));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

fn rational_str(c: &BigRational) -> String {
    if c.is_integer() {
        c.to_integer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn term(m: &Monomial, c: &BigRational, ell: u64) -> String {
    let x = match m.k {
        0 => String::new(),
        1 => format!("{ell}^n"),
        k => format!("{ell}^{{{k}n}}"),
    };
    if m.k == 0 && m.j == 0 {
        return rational_str(c);
    }
    let mut s = if c.is_one() {
        String::new()
    } else if c.is_integer() {
        rational_str(c)
    } else {
        format!("({})", rational_str(c))
    };
    if m.j == 1 {
        s.push('n');
    }
    if !x.is_empty() {
        if !s.is_empty() {
            s.push('·');
        }
        s.push_str(&x);
    }
    s
}

impl fmt::Display for GreenbergFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.formula())
    }
}

/// Solves `A c = b` exactly. Forward elimination is fraction-free (Bareiss);
/// back substitution is over the rationals. `None` if `A` is singular.
fn solve_exact(mut a: Vec<Vec<BigInt>>, mut b: Vec<BigInt>) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, pivot);
        b.swap(k, pivot);
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
            b[i] = (&b[i] * &a[k][k] - &a[i][k] * &b[k]) / &prev;
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = BigRational::from_integer(b[i].clone());
        for j in i + 1..n {
            acc -= BigRational::from_integer(a[i][j].clone()) * &x[j];
        }
        x[i] = acc / BigRational::from_integer(a[i][i].clone());
    }
    Some(x)
}

/// Fits the `2d + 1` coefficients on the consecutive entries starting at
/// `n = first`. `Ok(None)` when the system is singular.
pub fn fit_window(seq: &ValuationSequence, first: u32) -> Result<Option<GreenbergFit>> {
    let basis = monomial_basis(seq.d);
    let last = first + basis.len() as u32 - 1;
    let rows: Vec<&SequenceEntry> = (first..=last)
        .map(|n| {
            seq.entries
                .iter()
                .find(|e| e.n == n)
                .ok_or_else(|| Error::Unsupported(format!("no valuation for n = {n} in the window {first}..{last}")))
        })
        .collect::<Result<_>>()?;
    let a = rows
        .iter()
        .map(|e| basis.iter().map(|m| m.eval(seq.ell, e.n)).collect())
        .collect();
    let b = rows.iter().map(|e| BigInt::from(e.ord)).collect();
    Ok(solve_exact(a, b).map(|c| GreenbergFit {
        ell: seq.ell,
        d: seq.d,
        coefficients: basis.into_iter().zip(c).collect(),
        window: (first, last),
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    /// `ord_ell(kappa_n) - P(ell^n, n)` for every entry.
    pub residuals: Vec<(u32, BigRational)>,
    /// Largest range of trailing entries with zero residual.
    pub verified_range: Option<(u32, u32)>,
}

pub fn verify_fit(fit: &GreenbergFit, seq: &ValuationSequence) -> Verification {
    let residuals: Vec<(u32, BigRational)> = seq
        .entries
        .iter()
        .map(|e| (e.n, BigRational::from_integer(BigInt::from(e.ord)) - fit.eval(e.n)))
        .collect();
    let mut verified_range = None;
    for (n, r) in residuals.iter().rev() {
        if !r.is_zero() {
            break;
        }
        verified_range = Some((*n, verified_range.map_or(*n, |(_, hi)| hi)));
    }
    Verification {
        residuals,
        verified_range,
    }
}

/// The fit on the last window, checked against the whole sequence and
/// against the fit on the window one step earlier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitReport {
    pub fit: GreenbergFit,
    pub verification: Verification,
    /// The previous window exists and gives the same coefficients.
    pub stable: bool,
    pub leading_integral: bool,
}

impl FitReport {
    /// The two leading coefficients should be nonnegative integers; a stable
    /// fit that violates this is suspect.
    pub fn suspect(&self) -> bool {
        !self.leading_integral
    }
}

pub fn fit_report(seq: &ValuationSequence) -> Result<FitReport> {
    let unknowns = monomial_basis(seq.d).len() as u32;
    let Some(last) = seq.entries.last().map(|e| e.n) else {
        return Err(Error::Unsupported("empty valuation sequence".into()));
    };
    let first_n = seq.entries[0].n;
    if last + 1 < first_n + unknowns {
        return Err(Error::Unsupported(format!(
            "{} unknowns need at least that many layers, have n = {first_n}..{last}",
            unknowns
        )));
    }
    let start = last + 1 - unknowns;
    let fit = fit_window(seq, start)?
        .ok_or_else(|| Error::Inconsistent(format!("singular system on window {start}..{last}")))?;
    let stable = start > first_n
        && fit_window(seq, start - 1)?.is_some_and(|prev| prev.coefficients == fit.coefficients);
    let verification = verify_fit(&fit, seq);
    let leading_integral = fit.leading_coefficients_integral();
    Ok(FitReport {
        fit,
        verification,
        stable,
        leading_integral,
    })
}
