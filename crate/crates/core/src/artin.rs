//! Characters of `G(n)`, their Galois orbits, the special values
//! `h_X(1, psi) = det(D - A_psi)`, and `kappa_n` through the product formula
//! `ell^(dn) kappa_n = kappa_X * prod_{psi != 1} h_X(1, psi)`.
//!
//! A character of exact order `ell^k` is defined over `Q(zeta_{ell^k})` and its
//! orbit under `(Z/ell^n)^x` is the full set of its Galois conjugates, so the
//! orbit product is a norm from that field. Its `ell`-adic order is read off
//! as a `pi`-adic valuation without computing the norm.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::cyclotomic::{CycInt, Level};
use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::ring::{berkowitz_det, Poly, RingElem};
use crate::spanning::{ord_prime, spanning_tree_count, TreeCount};
use crate::voltage::VoltageSpec;

/// The character `psi_a(b) = zeta_{ell^n}^(a . b)` of `G(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharacterIndex {
    pub ell: u64,
    pub n: u32,
    pub a: Vec<u64>,
}

impl CharacterIndex {
    /// Index with entries reduced into `[0, ell^n)`.
    pub fn new(ell: u64, n: u32, a: &[i64]) -> Self {
        let m = ell.pow(n) as i128;
        CharacterIndex {
            ell,
            n,
            a: a.iter().map(|&x| (x as i128).rem_euclid(m) as u64).collect(),
        }
    }

    pub fn level(&self) -> Level {
        Level::new(self.ell, self.n)
    }

    pub fn is_trivial(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    /// `k` such that the character has order `ell^k`.
    pub fn exact_order_exp(&self) -> u32 {
        let min_ord = self
            .a
            .iter()
            .map(|&x| if x == 0 { self.n } else { ord_u64(x, self.ell).min(self.n) })
            .min()
            .unwrap_or(self.n);
        self.n - min_ord
    }

    /// The same character written at the level of its exact order, where it
    /// is primitive (some coordinate is a unit).
    pub fn primitive(&self) -> CharacterIndex {
        let k = self.exact_order_exp();
        let step = self.ell.pow(self.n - k);
        CharacterIndex {
            ell: self.ell,
            n: k,
            a: self.a.iter().map(|&x| x / step).collect(),
        }
    }

    /// The same character viewed at level `n >= self.n`.
    pub fn lift(&self, n: u32) -> CharacterIndex {
        assert!(n >= self.n);
        let step = self.ell.pow(n - self.n);
        CharacterIndex {
            ell: self.ell,
            n,
            a: self.a.iter().map(|&x| x * step).collect(),
        }
    }

    /// Exponent `a . b` of `zeta_{ell^n}` in `psi_a(b)`.
    pub fn pairing(&self, b: &[i64]) -> i64 {
        let m = self.ell.pow(self.n) as i128;
        let s: i128 = self.a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum();
        s.rem_euclid(m) as i64
    }

    /// `u . a` componentwise modulo `ell^n`.
    pub fn scaled(&self, u: u64) -> CharacterIndex {
        let m = self.ell.pow(self.n) as u128;
        CharacterIndex {
            ell: self.ell,
            n: self.n,
            a: self.a.iter().map(|&x| (x as u128 * u as u128 % m) as u64).collect(),
        }
    }
}

fn ord_u64(mut x: u64, ell: u64) -> u32 {
    let mut e = 0;
    while x.is_multiple_of(ell) {
        x /= ell;
        e += 1;
    }
    e
}

/// The units of `Z/ell^n`, ascending.
pub fn units(ell: u64, n: u32) -> Vec<u64> {
    let m = ell.pow(n);
    (1..m.max(2)).filter(|u| u % ell != 0).collect()
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut out = 1u128 % m as u128;
    let mut base = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            out = out * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    b = out as u64;
    b
}

fn prime_factors(mut x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        if x.is_multiple_of(p) {
            out.push(p);
            while x.is_multiple_of(p) {
                x /= p;
            }
        }
        p += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

/// Generators of `(Z/ell^n)^x`: `{-1, 5}` for `ell = 2, n >= 3` (the group is
/// not cyclic there), `{-1}` for `ell = 2, n = 2`, none when the group is
/// trivial, and a primitive root found by search for odd `ell`.
pub fn unit_generators(ell: u64, n: u32) -> Vec<u64> {
    let m = ell.pow(n);
    if n == 0 || m == 2 {
        return Vec::new();
    }
    if ell == 2 {
        return if n == 2 { vec![3] } else { vec![m - 1, 5] };
    }
    let phi = m / ell * (ell - 1);
    let factors = prime_factors(phi);
    let g = (2..m)
        .filter(|g| g % ell != 0)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, phi / q, m) != 1))
        .expect("(Z/ell^n)^x is cyclic for odd ell");
    vec![g]
}

/// A Galois orbit of characters: all unit multiples of `representative`,
/// which is the lexicographically least member.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CharacterOrbit {
    pub representative: CharacterIndex,
    pub size: u64,
    pub exact_order_exp: u32,
}

impl CharacterOrbit {
    pub fn exact_order(&self) -> u64 {
        self.representative.ell.pow(self.exact_order_exp)
    }

    /// All members, sorted.
    pub fn members(&self) -> Vec<CharacterIndex> {
        let rep = &self.representative;
        let set: BTreeSet<CharacterIndex> = units(rep.ell, rep.n).into_iter().map(|u| rep.scaled(u)).collect();
        set.into_iter().collect()
    }

    /// The orbit at a higher level containing the lifted characters.
    pub fn lift(&self, n: u32) -> CharacterOrbit {
        CharacterOrbit {
            representative: self.representative.lift(n),
            size: self.size,
            exact_order_exp: self.exact_order_exp,
        }
    }
}

fn orbit_of(rep: CharacterIndex) -> CharacterOrbit {
    let exact_order_exp = rep.exact_order_exp();
    let ell = rep.ell;
    let size = if exact_order_exp == 0 {
        1
    } else {
        ell.pow(exact_order_exp - 1) * (ell - 1)
    };
    CharacterOrbit {
        representative: rep,
        size,
        exact_order_exp,
    }
}

/// Orbits of the nontrivial characters of `G(n)` under the diagonal unit
/// action, found by closing each index under the unit generators. Sorted by
/// representative.
pub fn enumerate_orbits(ell: u64, n: u32, d: usize) -> Vec<CharacterOrbit> {
    assert!(n >= 1, "orbits are enumerated for n >= 1");
    let m = ell.pow(n) as usize;
    let total = m.pow(d as u32);
    let gens = unit_generators(ell, n);
    let decode = |mut i: usize| -> Vec<u64> {
        (0..d)
            .map(|_| {
                let x = i % m;
                i /= m;
                x as u64
            })
            .collect()
    };
    let encode = |a: &[u64]| a.iter().rev().fold(0usize, |acc, &x| acc * m + x as usize);
    let mut seen = vec![false; total];
    seen[0] = true;
    let mut out = Vec::new();
    for start in 1..total {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut least = decode(start);
        let mut size = 0u64;
        while let Some(i) = stack.pop() {
            size += 1;
            let a = decode(i);
            if a < least {
                least = a.clone();
            }
            for &g in &gens {
                let b: Vec<u64> = a.iter().map(|&x| (x as u128 * g as u128 % m as u128) as u64).collect();
                let j = encode(&b);
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        let orbit = orbit_of(CharacterIndex { ell, n, a: least });
        debug_assert_eq!(orbit.size, size);
        out.push(CharacterOrbit { size, ..orbit });
    }
    out.sort();
    out
}

/// Orbits of characters of exact order `ell^k`, written at level `k`.
///
/// Each such orbit has a unique member whose first unit coordinate is 1
/// (earlier coordinates then lie in `ell Z`), so these members are enumerated
/// directly; the representative is then the least unit multiple.
pub fn primitive_orbits(ell: u64, k: u32, d: usize) -> Vec<CharacterOrbit> {
    assert!(k >= 1);
    let m = ell.pow(k);
    let us = units(ell, k);
    let mut out = Vec::new();
    for lead in 0..d {
        // coordinates before `lead` range over ell*[0, ell^(k-1)), after it over [0, ell^k)
        let radices: Vec<u64> = (0..d)
            .map(|i| match i.cmp(&lead) {
                std::cmp::Ordering::Less => m / ell,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Greater => m,
            })
            .collect();
        let count: u64 = radices.iter().product();
        for mut idx in 0..count {
            let a: Vec<u64> = (0..d)
                .map(|i| {
                    let digit = idx % radices[i];
                    idx /= radices[i];
                    match i.cmp(&lead) {
                        std::cmp::Ordering::Less => digit * ell,
                        std::cmp::Ordering::Equal => 1,
                        std::cmp::Ordering::Greater => digit,
                    }
                })
                .collect();
            let normalized = CharacterIndex { ell, n: k, a };
            let least = us
                .iter()
                .map(|&u| normalized.scaled(u))
                .min()
                .expect("unit group is nonempty");
            out.push(orbit_of(least));
        }
    }
    out.sort();
    out
}

/// All nontrivial orbits at level `n`, assembled from the primitive orbits of
/// each exact order. Agrees with [`enumerate_orbits`], without touching every
/// element of `G(n)`.
pub fn orbits_by_order(ell: u64, n: u32, d: usize) -> Vec<CharacterOrbit> {
    let mut out: Vec<CharacterOrbit> = (1..=n)
        .flat_map(|k| primitive_orbits(ell, k, d).into_iter().map(move |o| o.lift(n)))
        .collect();
    out.sort();
    out
}

/// `A_psi`: entry `(i, j)` sums `psi(alpha(e))` over directed edges `e` from
/// `v_i` to `v_j`. Inverse edges carry `psi(-alpha(s))`.
pub fn twisted_adjacency(spec: &VoltageSpec, chi: &CharacterIndex) -> Vec<Vec<CycInt>> {
    let base = spec.base();
    let level = chi.level();
    let nv = base.vertex_count();
    let mut exps: Vec<Vec<Vec<(i64, i64)>>> = vec![vec![Vec::new(); nv]; nv];
    for e in 0..base.directed_edge_count() {
        exps[base.origin(e)][base.terminus(e)].push((chi.pairing(spec.voltage(e)), 1));
    }
    exps.into_iter()
        .map(|row| row.into_iter().map(|terms| CycInt::from_terms(level, terms)).collect())
        .collect()
}

fn twisted_laplacian(spec: &VoltageSpec, chi: &CharacterIndex) -> Vec<Vec<CycInt>> {
    let mut m = twisted_adjacency(spec, chi);
    let level = chi.level();
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = x.negated();
            if i == j {
                *x = x.plus(&CycInt::from_int(level, spec.base().valency(i) as i64));
            }
        }
    }
    m
}

/// `h_X(1, psi) = det(D - A_psi)` by a division-free determinant.
pub fn l_value_by_determinant(spec: &VoltageSpec, chi: &CharacterIndex) -> CycInt {
    berkowitz_det(&twisted_laplacian(spec, chi))
}

/// `h_X(1, psi)` in `Z[zeta_{ell^n}]`. On a bouquet this is the sum of
/// `eps(a . alpha(s))` over the loops; otherwise a determinant.
pub fn l_value_at_one(spec: &VoltageSpec, chi: &CharacterIndex) -> CycInt {
    if spec.base().is_bouquet() {
        let level = chi.level();
        let terms = spec.alpha().iter().flat_map(|b| {
            let x = chi.pairing(b);
            [(0, 2), (x, -1), (-x, -1)]
        });
        CycInt::from_terms(level, terms)
    } else {
        l_value_by_determinant(spec, chi)
    }
}

/// `h_X(u, psi) = det(I - A_psi u + (D - I) u^2)`.
pub fn l_polynomial(spec: &VoltageSpec, chi: &CharacterIndex) -> Poly<CycInt> {
    let level = chi.level();
    let zero = CycInt::zero(level);
    let a = twisted_adjacency(spec, chi);
    let rows: Vec<Vec<Poly<CycInt>>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| {
                    let mut c = vec![zero.clone(), x.negated()];
                    if i == j {
                        c[0] = CycInt::from_int(level, 1);
                        c.push(CycInt::from_int(level, spec.base().valency(i) as i64 - 1));
                    }
                    Poly::new(c, zero.clone())
                })
                .collect()
        })
        .collect();
    berkowitz_det(&rows)
}

/// `h_X(u) * prod_{psi != 1} h_X(u, psi)` over all characters of `G(n)`,
/// returned with integer coefficients. Fails if a coefficient is not a
/// rational integer.
pub fn artin_product(spec: &VoltageSpec, n: u32) -> Result<Poly<BigInt>> {
    let level = Level::new(spec.ell(), n);
    let zero = CycInt::zero(level);
    let mut acc: Poly<CycInt> = spec
        .base()
        .ihara_h()
        .0
        .map(zero.clone(), |c| CycInt::from_int(level, c.clone()));
    let m = spec.ell().pow(n) as usize;
    let total = m.pow(spec.d() as u32);
    for idx in 1..total {
        let mut i = idx;
        let a: Vec<i64> = (0..spec.d())
            .map(|_| {
                let x = i % m;
                i /= m;
                x as i64
            })
            .collect();
        acc = acc.times(&l_polynomial(spec, &CharacterIndex::new(spec.ell(), n, &a)));
    }
    let coeffs = acc
        .coeffs()
        .iter()
        .map(|c| {
            c.as_integer()
                .cloned()
                .ok_or_else(|| Error::Inconsistent(format!("non-rational coefficient {c:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(coeffs, BigInt::zero()))
}

/// Product of an orbit's L-values, with its `ell`-adic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LValueRecord {
    pub orbit: CharacterOrbit,
    /// `h_X(1, Psi)`; `None` when its computation was skipped as too large.
    pub integer_value: Option<BigInt>,
    pub ord_ell: u64,
}

fn primitive_value(spec: &VoltageSpec, orbit: &CharacterOrbit) -> Result<CycInt> {
    let chi = orbit.representative.primitive();
    let x = l_value_at_one(spec, &chi);
    if x.coeffs().iter().all(Zero::is_zero) {
        return Err(Error::VanishingLValue {
            level: orbit.representative.n,
            index: orbit.representative.a.clone(),
        });
    }
    Ok(x)
}

/// Orbit product and its order. The value is evaluated at the exact level of
/// the orbit; the integer (a norm from that level) is computed only when
/// that level has degree at most `norm_degree_limit`.
pub fn orbit_value(spec: &VoltageSpec, orbit: &CharacterOrbit, norm_degree_limit: usize) -> Result<LValueRecord> {
    let x = primitive_value(spec, orbit)?;
    let ord_ell = x.pi_adic_valuation()?;
    let integer_value = (x.level().degree() <= norm_degree_limit).then(|| x.norm());
    Ok(LValueRecord {
        orbit: orbit.clone(),
        integer_value,
        ord_ell,
    })
}

/// `V_k`: the sum of `ord_ell h_X(1, Psi)` over the orbits of exact order `ell^k`.
/// These are the only new factors when passing from layer `k - 1` to layer `k`.
pub fn level_valuation(spec: &VoltageSpec, k: u32) -> Result<u64> {
    let orbits = primitive_orbits(spec.ell(), k, spec.d());
    orbits
        .par_iter()
        .map(|o| primitive_value(spec, o)?.pi_adic_valuation())
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn kappa_base(spec: &VoltageSpec) -> Result<TreeCount> {
    TreeCount::new(spanning_tree_count(spec.base())?, spec.ell())
}

/// `ord_ell(kappa_n) = -dn + ord_ell(kappa_X) + sum_{k <= n} V_k`, for all
/// `n <= n_max` at once (entry `n` of the result).
pub fn ord_kappa_sequence(spec: &VoltageSpec, n_max: u32) -> Result<Vec<u64>> {
    let base = kappa_base(spec)?.ord_ell as i128;
    let mut acc: i128 = base;
    let mut out = vec![base as u64];
    for k in 1..=n_max {
        acc += level_valuation(spec, k)? as i128 - spec.d() as i128;
        if acc < 0 {
            return Err(Error::Inconsistent(format!("negative valuation {acc} at n = {k}")));
        }
        out.push(acc as u64);
    }
    Ok(out)
}

/// `kappa_n = kappa_X * prod_Psi h_X(1, Psi) / ell^(dn)`, exactly.
pub fn kappa_via_lfunctions(spec: &VoltageSpec, n: u32) -> Result<TreeCount> {
    let mut product = kappa_base(spec)?.kappa;
    for k in 1..=n {
        let norms = primitive_orbits(spec.ell(), k, spec.d())
            .par_iter()
            .map(|o| Ok(primitive_value(spec, o)?.norm()))
            .collect::<Result<Vec<BigInt>>>()?;
        for x in norms {
            product *= x;
        }
    }
    let divisor = BigInt::from(spec.ell()).pow(spec.d() as u32 * n);
    let (kappa, rem) = product.div_rem(&divisor);
    if !Zero::is_zero(&rem) || !kappa.is_positive() {
        return Err(Error::Inconsistent(format!(
            "orbit product {product} is not a positive multiple of {divisor}"
        )));
    }
    TreeCount::new(kappa, spec.ell())
}

/// `ord_ell(kappa_n)` from the orbit valuations at level `n` alone.
pub fn ord_kappa_via_lfunctions(spec: &VoltageSpec, n: u32) -> Result<u64> {
    Ok(*ord_kappa_sequence(spec, n)?.last().unwrap())
}

/// `kappa_X`'s valuation: convenience for reporting.
pub fn ord_kappa_base(g: &MultiGraph, ell: u64) -> Result<u64> {
    ord_prime(&spanning_tree_count(g)?, ell)
}
