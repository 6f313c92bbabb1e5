//! Exact arithmetic in `Z[zeta]` for `zeta` a primitive `ell^n`-th root of unity.
//!
//! Elements are coefficient vectors in the power basis `1, zeta, ..., zeta^(phi-1)`
//! with `phi = ell^(n-1) (ell - 1)`. Nothing is evaluated numerically: norms are
//! resultants against the cyclotomic polynomial and valuations are read off the
//! expansion in the uniformizer `pi = 1 - zeta`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

use crate::spanning::ord_prime;

/// The cyclotomic level `(ell, n)`, i.e. the ring `Z[zeta_{ell^n}]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    pub ell: u64,
    pub n: u32,
}

impl Level {
    pub fn new(ell: u64, n: u32) -> Self {
        Level { ell, n }
    }

    /// `ell^n`, the order of `zeta`.
    pub fn order(&self) -> u64 {
        self.ell.pow(self.n)
    }

    /// `phi(ell^n)`, the rank of `Z[zeta]` over `Z`.
    pub fn degree(&self) -> usize {
        if self.n == 0 {
            1
        } else {
            (self.ell.pow(self.n - 1) * (self.ell - 1)) as usize
        }
    }

    fn block(&self) -> u64 {
        self.ell.pow(self.n.saturating_sub(1))
    }

    /// Dense coefficients of the cyclotomic polynomial `Phi_{ell^n}`.
    pub fn cyclotomic_polynomial(&self) -> Vec<BigInt> {
        if self.n == 0 {
            return vec![BigInt::from(-1), BigInt::one()];
        }
        let block = self.block() as usize;
        let mut out = vec![BigInt::zero(); self.degree() + 1];
        for j in 0..self.ell as usize {
            out[j * block] = BigInt::one();
        }
        out
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.ell, self.n)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycInt {
    level: Level,
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycInt{}[", self.level)?;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*z^{i}")?;
        }
        write!(f, "]")
    }
}

impl CycInt {
    pub fn zero(level: Level) -> Self {
        CycInt {
            level,
            coeffs: vec![BigInt::zero(); level.degree()],
        }
    }

    pub fn from_int(level: Level, c: impl Into<BigInt>) -> Self {
        let mut x = CycInt::zero(level);
        x.coeffs[0] = c.into();
        x
    }

    /// Builds `sum c * zeta^e` from arbitrary integer exponents.
    pub fn from_terms<C: Into<BigInt>>(level: Level, terms: impl IntoIterator<Item = (i64, C)>) -> Self {
        let order = level.order() as i64;
        let mut raw = vec![BigInt::zero(); level.order() as usize];
        for (e, c) in terms {
            raw[e.rem_euclid(order) as usize] += c.into();
        }
        CycInt::reduce(level, raw)
    }

    /// Takes coefficients of `1, zeta, zeta^2, ...` of any length and reduces
    /// them to the power basis: exponents fold modulo `ell^n`, then each
    /// `zeta^e` with `e >= phi` is rewritten by the sparse relation
    /// `zeta^((ell-1) ell^(n-1)) = -(1 + zeta^(ell^(n-1)) + ... )`.
    fn reduce(level: Level, raw: Vec<BigInt>) -> Self {
        let order = level.order() as usize;
        let phi = level.degree();
        let mut folded = if raw.len() <= order {
            let mut raw = raw;
            raw.resize(order, BigInt::zero());
            raw
        } else {
            let mut folded = vec![BigInt::zero(); order];
            for (e, c) in raw.into_iter().enumerate() {
                if !c.is_zero() {
                    folded[e % order] += c;
                }
            }
            folded
        };
        if level.n > 0 {
            let block = level.block() as usize;
            for e in phi..order {
                if folded[e].is_zero() {
                    continue;
                }
                let c = std::mem::take(&mut folded[e]);
                let base = e - phi;
                for j in 0..level.ell as usize - 1 {
                    folded[base + j * block] -= &c;
                }
            }
        }
        folded.truncate(phi);
        CycInt {
            level,
            coeffs: folded,
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `zeta^k`, with `k` reduced modulo `ell^n`.
    pub fn zeta_power(level: Level, k: i64) -> Self {
        CycInt::from_terms(level, [(k, 1)])
    }

    /// `eps(a) = (1 - zeta^a)(1 - zeta^-a) = 2 - zeta^a - zeta^-a`.
    pub fn epsilon(level: Level, a: i64) -> Self {
        CycInt::from_terms(level, [(0, 2), (a, -1), (-a, -1)])
    }

    /// The rational integer this element equals, if it is one.
    pub fn as_integer(&self) -> Option<&BigInt> {
        self.coeffs[1..]
            .iter()
            .all(|c| c.is_zero())
            .then(|| &self.coeffs[0])
    }

    /// Galois conjugate under `zeta -> zeta^u` (`u` coprime to `ell`).
    pub fn galois(&self, u: i64) -> Self {
        assert!(u.rem_euclid(self.level.ell as i64) != 0 || self.level.n == 0);
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as i64 * u, c.clone()));
        CycInt::from_terms(self.level, terms)
    }

    /// Image under `Z[zeta_{ell^k}] -> Z[zeta_{ell^n}]`, `zeta_{ell^k} -> zeta_{ell^n}^(ell^(n-k))`.
    pub fn embed(&self, target: Level) -> Self {
        assert!(target.ell == self.level.ell && target.n >= self.level.n);
        let step = self.level.ell.pow(target.n - self.level.n) as i64;
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as i64 * step, c.clone()));
        CycInt::from_terms(target, terms)
    }

    /// Absolute norm to `Z`: the resultant `Res(Phi_{ell^n}, x)`, equal to the
    /// product of all complex embeddings of `x`.
    pub fn norm(&self) -> BigInt {
        resultant(&self.level.cyclotomic_polynomial(), &self.coeffs)
    }

    /// Order of `x` at the prime `pi = 1 - zeta` above `ell`. Because `ell` is
    /// totally ramified this equals `ord_ell(N(x))`.
    ///
    /// Writing `x = ell^t * y` with `y` not divisible by `ell`, the residue of
    /// `y` in `Z[zeta]/ell = F_ell[pi]/(pi^phi)` is nonzero, so
    /// `v_pi(x) = phi * t + (first j with [pi^j] y != 0 mod ell)`. Everything
    /// after the content is computed modulo `ell`.
    pub fn pi_adic_valuation(&self) -> Result<u64> {
        let ell = self.level.ell;
        let nonzero: Vec<(usize, &BigInt)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if nonzero.is_empty() {
            return Err(Error::ZeroValuation);
        }
        if self.level.n == 0 {
            return ord_prime(&self.coeffs[0], ell);
        }
        let mut t = u64::MAX;
        for (_, c) in &nonzero {
            t = t.min(ord_prime(c, ell)?);
        }
        let scale = BigInt::from(ell).pow(t as u32);
        let ell_big = BigInt::from(ell);
        let residues: Vec<(usize, u64)> = nonzero
            .iter()
            .filter_map(|&(i, c)| {
                let r = (c / &scale).mod_floor(&ell_big).to_u64().unwrap();
                (r != 0).then_some((i, r))
            })
            .collect();
        let phi = self.level.degree();
        let j = if residues.len() <= SPARSE_SCAN_LIMIT {
            first_pi_coefficient_sparse(ell, phi, &residues)
        } else {
            first_pi_coefficient_dense(ell, phi, &residues)
        };
        Ok(phi as u64 * t + j as u64)
    }

    /// `v_ell(x) = v_pi(x) / phi(ell^n)`, normalized so that `v_ell(ell) = 1`.
    pub fn v_ell(&self) -> Result<Valuation> {
        Ok(Valuation {
            pi_order: self.pi_adic_valuation()?,
            ramification: self.level.degree() as u64,
        })
    }

    fn check_level(&self, rhs: &Self) {
        assert_eq!(self.level, rhs.level, "cyclotomic levels differ");
    }
}

/// Above this many nonzero residues the dense Horner expansion is cheaper
/// than the per-coefficient Lucas scan.
const SPARSE_SCAN_LIMIT: usize = 48;

/// First `j` with `sum_i r_i * C(i, j) != 0 (mod ell)`, scanning `j` upward.
/// Binomials modulo `ell` come from Lucas' theorem.
pub(crate) fn first_pi_coefficient_sparse(ell: u64, phi: usize, residues: &[(usize, u64)]) -> usize {
    let lucas = Lucas::new(ell);
    for j in 0..phi {
        let mut acc = 0u64;
        for &(i, r) in residues {
            if i >= j {
                acc = (acc + r * lucas.binomial(i as u64, j as u64)) % ell;
            }
        }
        if acc != 0 {
            return j;
        }
    }
    unreachable!("nonzero residue vanished under a unimodular change of basis")
}

/// Same result by Horner's rule on `y(1 - pi)` modulo `ell`.
pub(crate) fn first_pi_coefficient_dense(ell: u64, phi: usize, residues: &[(usize, u64)]) -> usize {
    let mut c = vec![0u64; phi];
    for &(i, r) in residues {
        c[i] = r;
    }
    let mut acc = vec![0u64; phi];
    for (deg, &ci) in c.iter().enumerate().rev() {
        // acc <- acc * (1 - pi) + c_i; acc has degree < phi - 1 - deg here
        let top = phi - 1 - deg;
        for j in (1..=top).rev() {
            acc[j] = (acc[j] + ell - acc[j - 1]) % ell;
        }
        acc[0] = (acc[0] + ci) % ell;
    }
    acc.iter()
        .position(|&a| a != 0)
        .expect("nonzero residue vanished under a unimodular change of basis")
}

struct Lucas {
    ell: u64,
    fact: Vec<u64>,
    inv_fact: Vec<u64>,
}

impl Lucas {
    fn new(ell: u64) -> Self {
        let p = ell as usize;
        let mut fact = vec![1u64; p];
        for i in 1..p {
            fact[i] = fact[i - 1] * i as u64 % ell;
        }
        let inv_fact = fact.iter().map(|&f| pow_mod(f, ell - 2, ell)).collect();
        Lucas { ell, fact, inv_fact }
    }

    fn small(&self, a: u64, b: u64) -> u64 {
        if b > a {
            return 0;
        }
        let (a, b) = (a as usize, b as usize);
        self.fact[a] * self.inv_fact[b] % self.ell * self.inv_fact[a - b] % self.ell
    }

    fn binomial(&self, mut a: u64, mut b: u64) -> u64 {
        let mut out = 1;
        while b > 0 {
            out = out * self.small(a % self.ell, b % self.ell) % self.ell;
            if out == 0 {
                return 0;
            }
            a /= self.ell;
            b /= self.ell;
        }
        out
    }
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut out = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            out = out * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    out
}

/// A valuation `pi_order / ramification` in `(1/phi) Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Valuation {
    pub pi_order: u64,
    pub ramification: u64,
}

impl Valuation {
    pub fn as_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.pi_order, self.ramification)
    }
}

impl crate::ring::RingElem for CycInt {
    fn zero_like(&self) -> Self {
        CycInt::zero(self.level)
    }
    fn one_like(&self) -> Self {
        CycInt::from_int(self.level, 1)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.check_level(rhs);
        CycInt {
            level: self.level,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.check_level(rhs);
        CycInt {
            level: self.level,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
    fn times(&self, rhs: &Self) -> Self {
        self.check_level(rhs);
        let phi = self.level.degree();
        let mut raw = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !Zero::is_zero(b) {
                    raw[i + j] += a * b;
                }
            }
        }
        CycInt::reduce(self.level, raw)
    }
    fn negated(&self) -> Self {
        CycInt {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

fn trim(p: &mut Vec<BigInt>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// `lc(b)^(deg a - deg b + 1) * a  mod  b`.
fn pseudo_remainder(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (da, db) = (a.len() - 1, b.len() - 1);
    let lcb = &b[db];
    let mut r = a.to_vec();
    for k in (db..=da).rev() {
        let coef = r[k].clone();
        for x in r.iter_mut() {
            *x *= lcb;
        }
        if !coef.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                r[k - db + i] -= &coef * bi;
            }
        }
    }
    r.truncate(db);
    trim(&mut r);
    r
}

/// Resultant of two integer polynomials (dense, lowest degree first) by the
/// subresultant pseudo-remainder sequence, fraction-free throughout.
pub fn resultant(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    trim(&mut a);
    trim(&mut b);
    if a.is_empty() || b.is_empty() {
        return BigInt::zero();
    }
    let (ca, cb) = (content(&a), content(&b));
    let t = ca.pow((b.len() - 1) as u32) * cb.pow((a.len() - 1) as u32);
    a.iter_mut().for_each(|x| *x /= &ca);
    b.iter_mut().for_each(|x| *x /= &cb);
    let mut s = BigInt::one();
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
        if (a.len() - 1) % 2 == 1 && (b.len() - 1) % 2 == 1 {
            s = -s;
        }
    }
    if b.len() == 1 {
        return s * t * b[0].pow((a.len() - 1) as u32);
    }
    let (mut g, mut h) = (BigInt::one(), BigInt::one());
    loop {
        let (da, db) = (a.len() - 1, b.len() - 1);
        let delta = (da - db) as u32;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = pseudo_remainder(&a, &b);
        a = b;
        let divisor = &g * h.pow(delta);
        b = r.into_iter().map(|x| x / &divisor).collect();
        g = a.last().unwrap().clone();
        if delta > 0 {
            h = g.pow(delta) / h.pow(delta - 1);
        }
        if b.is_empty() {
            return BigInt::zero();
        }
        if b.len() == 1 {
            let da = (a.len() - 1) as u32;
            let last = b[0].pow(da) / h.pow(da - 1);
            return s * t * last;
        }
    }
}

/// `|x|` for display of large values.
pub fn digit_count(x: &BigInt) -> usize {
    x.abs().to_string().len()
}
