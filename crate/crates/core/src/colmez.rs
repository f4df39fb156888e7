//! Rational bookkeeping on `Q/Z`: fractional parts, `V_p`, `ε_q`, the
//! closed-form valuation of `β_γ(q)`, the `z_ℓ` valuation formula, the
//! transition balance, and the kernel computation forcing `w_{2,γ} = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::valuation::Valuation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColmezError {
    #[error("triple has a zero component")]
    ZeroComponent,
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("series order {order} is below the required index {needed}")]
    TruncationTooSmall { needed: usize, order: usize },
    #[error("character value {0} is not odd")]
    InvalidChi(i64),
}

/// An element of `Q/Z`, stored as its representative in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QmodZ(Rational64);

impl QmodZ {
    pub fn new(r: Rational64) -> QmodZ {
        QmodZ(r - r.floor())
    }

    pub fn from_frac(num: i64, den: i64) -> QmodZ {
        QmodZ::new(Rational64::new(num, den))
    }

    /// `⟨r⟩`.
    pub fn frac(self) -> Rational64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_half(self) -> bool {
        self.0 == Rational64::new(1, 2)
    }

    /// Multiplication by an integer, e.g. a cyclotomic character value.
    pub fn scale(self, k: i64) -> QmodZ {
        QmodZ::new(self.0 * k)
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    /// Exponent `k` when the denominator is `2^k`.
    pub fn two_power_exponent(self) -> Option<u32> {
        let d = self.denom();
        (d.count_ones() == 1).then(|| d.trailing_zeros())
    }
}

impl std::ops::Add for QmodZ {
    type Output = QmodZ;

    fn add(self, rhs: QmodZ) -> QmodZ {
        QmodZ::new(self.0 + rhs.0)
    }
}

impl std::ops::Neg for QmodZ {
    type Output = QmodZ;

    fn neg(self) -> QmodZ {
        QmodZ::new(-self.0)
    }
}

impl fmt::Display for QmodZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for QmodZ {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `(ρ, σ, τ)` with `ρ + σ + τ = 0` in `Q/Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TripleQ {
    pub rho: QmodZ,
    pub sigma: QmodZ,
    pub tau: QmodZ,
}

impl TripleQ {
    /// Completes `(ρ, σ)` with `τ = -ρ - σ`.
    pub fn new(rho: QmodZ, sigma: QmodZ) -> TripleQ {
        TripleQ { rho, sigma, tau: -(rho + sigma) }
    }

    pub fn from_parts(rho: QmodZ, sigma: QmodZ, tau: QmodZ) -> Result<TripleQ, ColmezError> {
        if !(rho + sigma + tau).is_zero() {
            return Err(ColmezError::InvalidTriple(format!("{rho} + {sigma} + {tau} is not 0")));
        }
        Ok(TripleQ { rho, sigma, tau })
    }

    /// The triple with fractional parts `a/2^n`, `b/2^n`.
    pub fn from_branch(n: u32, a: i64, b: i64) -> TripleQ {
        let m = 1i64 << n;
        TripleQ::new(QmodZ::from_frac(a, m), QmodZ::from_frac(b, m))
    }

    pub fn components(&self) -> [QmodZ; 3] {
        [self.rho, self.sigma, self.tau]
    }

    /// Diagonal action of an odd integer.
    pub fn act(&self, chi: i64) -> TripleQ {
        TripleQ { rho: self.rho.scale(chi), sigma: self.sigma.scale(chi), tau: self.tau.scale(chi) }
    }

    fn require_nonzero(&self) -> Result<(), ColmezError> {
        if self.components().iter().any(|c| c.is_zero()) {
            Err(ColmezError::ZeroComponent)
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for TripleQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.rho, self.sigma, self.tau)
    }
}

fn vp_int(mut x: i64, p: i64) -> i64 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// `v_p` of a nonzero rational.
pub fn vp_rational(r: Rational64, p: i64) -> i64 {
    assert!(!r.is_zero(), "valuation of zero");
    vp_int(*r.numer(), p) - vp_int(*r.denom(), p)
}

/// `min(v_p(⟨r⟩), 0)`, and `0` for `r = 0`.
pub fn v_p_of(r: QmodZ, p: i64) -> i64 {
    if r.is_zero() {
        0
    } else {
        vp_rational(r.frac(), p).min(0)
    }
}

fn inverse_mod(a: i64, m: i64) -> i64 {
    let g = a.extended_gcd(&m);
    assert_eq!(g.gcd, 1, "{a} is not invertible mod {m}");
    g.x.rem_euclid(m)
}

/// `V_p(r)`.
pub fn big_v(r: QmodZ, p: i64) -> Rational64 {
    let v = v_p_of(r, p);
    if v >= 0 {
        return Rational64::zero();
    }
    // r_(p) = p^{-v} r has denominator prime to p.
    let r_p = r.scale(p.pow((-v) as u32));
    // r_(p)/p inside Z_(p)/Z: numerator times p^{-1} modulo the denominator.
    let den = r_p.denom();
    let r_p_over_p = if den == 1 {
        QmodZ::from_frac(0, 1)
    } else {
        QmodZ::from_frac(*r_p.frac().numer() * inverse_mod(p.rem_euclid(den), den), den)
    };
    let half = Rational64::new(1, 2);
    let scale = Rational64::from_integer((p - 1) * p.pow((-v - 1) as u32));
    (r.frac() - half) * v - (r_p_over_p.frac() - half) / scale
}

/// `V_p` of a triple: the sum over its components.
pub fn big_v_triple(q: &TripleQ, p: i64) -> Rational64 {
    q.components().iter().map(|&c| big_v(c, p)).sum()
}

/// `ε_q = ⟨ρ⟩ + ⟨σ⟩ + ⟨τ⟩ - 1`.
pub fn epsilon_q(q: &TripleQ) -> Result<Rational64, ColmezError> {
    q.require_nonzero()?;
    Ok(q.components().iter().map(|c| c.frac()).sum::<Rational64>() - 1)
}

/// `a_r(χ) = ⟨χr⟩ - ½`.
pub fn a_r_eval(r: QmodZ, chi: i64) -> Rational64 {
    r.scale(chi).frac() - Rational64::new(1, 2)
}

fn require_odd(chi: i64) -> Result<(), ColmezError> {
    if chi.rem_euclid(2) == 1 {
        Ok(())
    } else {
        Err(ColmezError::InvalidChi(chi))
    }
}

/// Shape `(n, s)` of a triple whose fractional parts are `a/2^n, b/2^n, c/2^n`
/// with `a, c` odd and `1 ≤ v_2(b) ≤ n - 2`, after moving the even
/// numerator to the middle. Returns the reordered triple.
pub fn branch_shape(q: &TripleQ) -> Result<(TripleQ, u32, u32), ColmezError> {
    q.require_nonzero()?;
    let exps: Vec<u32> = q
        .components()
        .iter()
        .map(|c| c.two_power_exponent().ok_or_else(|| ColmezError::InvalidTriple(format!("{c} has a denominator that is not a power of 2"))))
        .collect::<Result<_, _>>()?;
    let n = *exps.iter().max().expect("three components");
    let c = q.components();
    let even: Vec<usize> = (0..3).filter(|&k| exps[k] < n).collect();
    if even.len() != 1 {
        return Err(ColmezError::InvalidTriple(format!("{q} does not have exactly one even numerator over 2^{n}")));
    }
    let k = even[0];
    let vb = n - exps[k];
    if vb < 1 || vb + 2 > n {
        return Err(ColmezError::InvalidTriple(format!("v_2(b) = {vb} is outside [1, n - 2] for n = {n}")));
    }
    let others: Vec<QmodZ> = (0..3).filter(|&j| j != k).map(|j| c[j]).collect();
    let ordered = TripleQ { rho: others[0], sigma: c[k], tau: others[1] };
    Ok((ordered, n, n - vb))
}

/// `Σ v(⟨x⟩)(⟨x⟩ - ⟨χx⟩)` over the components.
pub fn beta_val_closed(q: &TripleQ, chi: i64) -> Result<Rational64, ColmezError> {
    require_odd(chi)?;
    branch_shape(q)?;
    Ok(q.components()
        .iter()
        .map(|&x| Rational64::from_integer(vp_rational(x.frac(), 2)) * (x.frac() - x.scale(chi).frac()))
        .sum())
}

/// `n(⟨γρ⟩ - ⟨ρ⟩) + s(⟨γσ⟩ - ⟨σ⟩) + n(⟨γτ⟩ - ⟨τ⟩)` for an ordered triple.
pub fn beta_rearranged(q: &TripleQ, chi: i64, n: u32, s: u32) -> Rational64 {
    let g = q.act(chi);
    let (n, s) = (Rational64::from_integer(n as i64), Rational64::from_integer(s as i64));
    n * (g.rho.frac() - q.rho.frac()) + s * (g.sigma.frac() - q.sigma.frac()) + n * (g.tau.frac() - q.tau.frac())
}

/// `(n - s)(⟨σ⟩ - ⟨γσ⟩) + n(ε_{γq} - ε_q)` for an ordered triple.
pub fn beta_from_z_difference(q: &TripleQ, chi: i64, n: u32, s: u32) -> Result<Rational64, ColmezError> {
    let g = q.act(chi);
    let nn = Rational64::from_integer(n as i64);
    let ns = Rational64::from_integer(n as i64 - s as i64);
    Ok(ns * (q.sigma.frac() - g.sigma.frac()) + nn * (epsilon_q(&g)? - epsilon_q(q)?))
}

/// `(n - s)(⟨σ⟩ - 1) - nε_q + i/2 + (n - s/2 + 1/2)`.
pub fn z_formula(q: &TripleQ, n: u32, s: u32, i: u32) -> Result<Rational64, ColmezError> {
    let n = n as i64;
    let s = s as i64;
    Ok(Rational64::from_integer(n - s) * (q.sigma.frac() - 1) - Rational64::from_integer(n) * epsilon_q(q)?
        + Rational64::new(i as i64, 2)
        + Rational64::new(2 * n - s + 1, 2))
}

/// Exact valuations read off one computed disc and its series.
#[derive(Clone, Debug, Serialize)]
pub struct ZComponents {
    pub val_d: Valuation,
    pub val_d_minus_1: Valuation,
    pub val_e: Valuation,
    pub alpha_tilde: Vec<Valuation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZValuation {
    pub i: u32,
    pub l: usize,
    #[serde(serialize_with = "crate::valuation::serialize_ratio")]
    pub formula: Rational64,
    pub observed: Valuation,
    pub alpha_tilde: Valuation,
}

/// Formula and observed valuation of `z_{ℓ_i}`, `ℓ_i = 2^i - 1`, for an
/// ordered triple. The observed value sums the valuations of
/// `d^{⟨ρ⟩-1}`, `(d-1)^{⟨σ⟩-1}`, `⟨ρ+σ⟩^{ε_q}`, `ã_{ℓ_i}` and `e`.
pub fn z_valuation(q: &TripleQ, n: u32, s: u32, i: u32, comps: &ZComponents) -> Result<ZValuation, ColmezError> {
    let l = (1usize << i) - 1;
    let order = comps.alpha_tilde.len().saturating_sub(1);
    if l > order {
        return Err(ColmezError::TruncationTooSmall { needed: l, order });
    }
    let formula = z_formula(q, n, s, i)?;
    let eps = epsilon_q(q)?;
    let rho_sigma = (q.rho + q.sigma).frac();
    let constant = Valuation::Finite(Rational64::from_integer(vp_rational(rho_sigma, 2)) * eps);
    let observed = comps.val_d.scale(q.rho.frac() - 1)
        + comps.val_d_minus_1.scale(q.sigma.frac() - 1)
        + constant
        + comps.alpha_tilde[l]
        + comps.val_e;
    Ok(ZValuation { i, l, formula, observed, alpha_tilde: comps.alpha_tilde[l] })
}

fn require_transition_domain(q: &TripleQ) -> Result<(), ColmezError> {
    q.require_nonzero()?;
    for c in q.components() {
        if c.two_power_exponent().is_none() {
            return Err(ColmezError::InvalidTriple(format!("{c} has a denominator that is not a power of 2")));
        }
        if c.is_half() {
            return Err(ColmezError::InvalidTriple(format!("{q} has a component equal to 1/2")));
        }
    }
    Ok(())
}

/// `V_2(γq) - V_2(q) + v(β_γ(q))`, which vanishes identically.
///
/// With `v(ω_q) - v(ω_{γq}) = v(β_γ(q))` and `w_2(b_q) = v(ω_q) - V_2(q)`,
/// the difference `w_2(b_q) - w_2(b_{γq})` expands to this sum.
pub fn transition_sum(q: &TripleQ, chi: i64) -> Result<Rational64, ColmezError> {
    require_transition_domain(q)?;
    Ok(big_v_triple(&q.act(chi), 2) - big_v_triple(q, 2) + beta_val_closed(q, chi)?)
}

/// The same balance with `v(β_γ(q))` subtracted instead of added.
pub fn transition_sum_minus_variant(q: &TripleQ, chi: i64) -> Result<Rational64, ColmezError> {
    require_transition_domain(q)?;
    Ok(big_v_triple(&q.act(chi), 2) - big_v_triple(q, 2) - beta_val_closed(q, chi)?)
}

/// Seeded sample of triples in the transition domain with denominators dividing `2^max_exp`.
pub fn random_transition_triples(seed: u64, count: usize, max_exp: u32) -> Vec<TripleQ> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 1i64 << max_exp;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q = TripleQ::new(QmodZ::from_frac(rng.gen_range(1..m), m), QmodZ::from_frac(rng.gen_range(1..m), m));
        if require_transition_domain(&q).is_ok() {
            out.push(q);
        }
    }
    out
}

/// Every triple of the transition domain with denominators dividing `2^max_exp`.
pub fn all_transition_triples(max_exp: u32) -> Vec<TripleQ> {
    let m = 1i64 << max_exp;
    let mut out = Vec::new();
    for a in 1..m {
        for b in 1..m {
            let q = TripleQ::new(QmodZ::from_frac(a, m), QmodZ::from_frac(b, m));
            if require_transition_domain(&q).is_ok() {
                out.push(q);
            }
        }
    }
    out
}

/// The linear system on `f: (1/2^N)Z/Z → Q` with `f(0) = f(1/2) = 0` and
/// `f(ρ) + f(σ) + f(τ) = 0` for every zero-sum triple avoiding `1/2`.
#[derive(Clone, Debug)]
pub struct CzeroSystem {
    pub level: u32,
    pub unknowns: usize,
    /// Sparse rows: `(column, coefficient)`; column `j` is `f(j/2^N)`.
    pub rows: Vec<Vec<(usize, i64)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CzeroResult {
    pub level: u32,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub kernel_dimension: usize,
    /// Rank after also imposing `f(-r) = -f(r)`; equal to `rank` iff those relations are implied.
    pub rank_with_antisymmetry: usize,
    /// A kernel basis, as values at `j/2^N`, when the kernel is nonzero.
    pub kernel_basis: Vec<Vec<String>>,
}

fn sparse_row(entries: &[usize]) -> Vec<(usize, i64)> {
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for &e in entries {
        *acc.entry(e).or_insert(0) += 1;
    }
    acc.into_iter().filter(|&(_, v)| v != 0).collect()
}

impl CzeroSystem {
    pub fn build(level: u32) -> CzeroSystem {
        let m = 1usize << level;
        let half = (level >= 1).then_some(m / 2);
        let mut rows = vec![vec![(0, 1)]];
        if let Some(h) = half {
            rows.push(vec![(h, 1)]);
        }
        for j1 in 0..m {
            for j2 in j1..m {
                let j3 = (2 * m - j1 - j2) % m;
                if j3 < j2 {
                    continue;
                }
                if Some(j1) == half || Some(j2) == half || Some(j3) == half {
                    continue;
                }
                rows.push(sparse_row(&[j1, j2, j3]));
            }
        }
        CzeroSystem { level, unknowns: m, rows }
    }

    fn antisymmetry_rows(&self) -> Vec<Vec<(usize, i64)>> {
        let m = self.unknowns;
        (0..m).map(|j| sparse_row(&[j, (m - j) % m])).collect()
    }

    pub fn solve(&self) -> CzeroResult {
        let mut basis = Echelon::new(self.unknowns);
        for row in &self.rows {
            if basis.full() {
                break;
            }
            basis.insert(row);
        }
        let rank = basis.rank();
        let kernel_basis = basis
            .kernel()
            .into_iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect())
            .collect();
        for row in self.antisymmetry_rows() {
            basis.insert(&row);
        }
        CzeroResult {
            level: self.level,
            unknowns: self.unknowns,
            equations: self.rows.len(),
            rank,
            kernel_dimension: self.unknowns - rank,
            rank_with_antisymmetry: basis.rank(),
            kernel_basis,
        }
    }

    /// One `row col value` line per nonzero entry.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                writeln!(out, "{r} {c} {v}")?;
            }
        }
        Ok(())
    }
}

/// Incremental reduced row echelon form over `Q`.
struct Echelon {
    cols: usize,
    /// (pivot column, row) with every row zero at the other pivot columns.
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Echelon {
    fn new(cols: usize) -> Echelon {
        Echelon { cols, rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn full(&self) -> bool {
        self.rows.len() == self.cols
    }

    fn insert(&mut self, sparse: &[(usize, i64)]) {
        let mut v = vec![BigRational::zero(); self.cols];
        for &(c, x) in sparse {
            v[c] += BigRational::from_integer(BigInt::from(x));
        }
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (a, b) in v.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *a -= &f * b;
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else { return };
        let lead = v[p].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (a, b) in row.iter_mut().zip(&v) {
                    if !b.is_zero() {
                        *a -= &f * b;
                    }
                }
            }
        }
        self.rows.push((p, v));
    }

    fn kernel(&self) -> Vec<Vec<BigRational>> {
        let pivots: Vec<usize> = self.rows.iter().map(|(p, _)| *p).collect();
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![BigRational::zero(); self.cols];
                v[free] = BigRational::one();
                for (p, row) in &self.rows {
                    v[*p] = -row[free].clone();
                }
                v
            })
            .collect()
    }
}

/// Kernel dimension of [`CzeroSystem`] at the given level.
pub fn czero_kernel(level: u32) -> usize {
    CzeroSystem::build(level).solve().kernel_dimension
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn q3(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> TripleQ {
        TripleQ::from_parts(QmodZ::from_frac(a.0, a.1), QmodZ::from_frac(b.0, b.1), QmodZ::from_frac(c.0, c.1)).unwrap()
    }

    #[test]
    fn fractional_parts() {
        assert_eq!(QmodZ::from_frac(-1, 4).frac(), r(3, 4));
        assert_eq!(QmodZ::from_frac(9, 4).frac(), r(1, 4));
        assert!(QmodZ::from_frac(3, 1).is_zero());
    }

    #[test]
    fn v_p_values() {
        assert_eq!(v_p_of(QmodZ::from_frac(1, 8), 2), -3);
        assert_eq!(v_p_of(QmodZ::from_frac(1, 3), 2), 0);
        assert_eq!(v_p_of(QmodZ::from_frac(3, 4), 2), -2);
        assert_eq!(v_p_of(QmodZ::from_frac(0, 1), 2), 0);
    }

    /// Independent evaluation of `V_p` by searching for `r_(p)/p` directly.
    fn big_v_oracle(x: QmodZ, p: i64) -> Rational64 {
        let v = v_p_of(x, p);
        if v >= 0 {
            return Rational64::zero();
        }
        let r_p = x.scale(p.pow((-v) as u32));
        let den = r_p.denom();
        let y = (0..den)
            .map(|k| QmodZ::from_frac(k, den))
            .find(|y| y.scale(p) == r_p)
            .unwrap();
        let half = r(1, 2);
        (x.frac() - half) * v - (y.frac() - half) / ((p - 1) * p.pow((-v - 1) as u32))
    }

    #[test]
    fn big_v_values() {
        assert_eq!(big_v(QmodZ::from_frac(1, 3), 2), r(0, 1));
        assert_eq!(big_v(QmodZ::from_frac(1, 2), 2), r(1, 2));
        assert_eq!(big_v(QmodZ::from_frac(1, 4), 2), r(3, 4));
        for den in 1..60 {
            for num in 0..den {
                for p in [2, 3, 5] {
                    let x = QmodZ::from_frac(num, den);
                    assert_eq!(big_v(x, p), big_v_oracle(x, p), "r={x} p={p}");
                }
            }
        }
    }

    #[test]
    fn big_v_two_power_closed_form() {
        // odd numerator over 2^k: V = -k<x> + k/2 + 2^{-k}
        for k in 1..8u32 {
            for a in (1..(1i64 << k)).step_by(2) {
                let x = QmodZ::from_frac(a, 1 << k);
                let k = k as i64;
                assert_eq!(big_v(x, 2), -x.frac() * k + r(k, 2) + r(1, 1 << k));
            }
        }
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon_q(&q3((1, 8), (1, 4), (5, 8))).unwrap(), r(0, 1));
        assert_eq!(epsilon_q(&q3((3, 8), (3, 4), (7, 8))).unwrap(), r(1, 1));
        assert_eq!(epsilon_q(&q3((1, 2), (1, 4), (1, 4))).unwrap(), r(0, 1));
        assert_eq!(epsilon_q(&q3((0, 1), (1, 4), (3, 4))).unwrap_err(), ColmezError::ZeroComponent);
    }

    #[test]
    fn a_r_values() {
        assert_eq!(a_r_eval(QmodZ::from_frac(1, 4), 1), r(-1, 4));
        assert_eq!(a_r_eval(QmodZ::from_frac(1, 4), 3), r(1, 4));
        assert_eq!(a_r_eval(QmodZ::from_frac(0, 1), 7), r(-1, 2));
    }

    #[test]
    fn beta_examples() {
        let q = q3((1, 8), (1, 4), (5, 8));
        assert_eq!(beta_val_closed(&q, 3).unwrap(), r(5, 2));
        assert_eq!(beta_val_closed(&q, 1).unwrap(), r(0, 1));
        assert_eq!(beta_rearranged(&q, 3, 3, 2), r(5, 2));
        assert_eq!(beta_from_z_difference(&q, 3, 3, 2).unwrap(), r(5, 2));
        assert_eq!(beta_val_closed(&q, 2).unwrap_err(), ColmezError::InvalidChi(2));
        assert!(matches!(
            beta_val_closed(&q3((1, 4), (1, 4), (1, 2)), 3),
            Err(ColmezError::InvalidTriple(_))
        ));
    }

    #[test]
    fn z_formula_examples() {
        let q = TripleQ::from_branch(3, 1, 2);
        assert_eq!(z_formula(&q, 3, 2, 2).unwrap(), r(11, 4));
        // i = 0 drops the digit-sum term
        assert_eq!(z_formula(&q, 3, 2, 0).unwrap(), r(-3, 4) + r(5, 2));
        let comps = ZComponents {
            val_d: Valuation::int(0),
            val_d_minus_1: Valuation::int(1),
            val_e: Valuation::frac(5, 2),
            alpha_tilde: vec![Valuation::int(0); 4],
        };
        assert_eq!(
            z_valuation(&q, 3, 2, 3, &comps).unwrap_err(),
            ColmezError::TruncationTooSmall { needed: 7, order: 3 }
        );
    }

    #[test]
    fn transition_example_and_sign() {
        let q = q3((1, 8), (1, 4), (5, 8));
        assert_eq!(transition_sum(&q, 3).unwrap(), r(0, 1));
        assert_eq!(transition_sum(&q, 1).unwrap(), r(0, 1));
        // subtracting instead of adding leaves exactly -2 v(β)
        assert_eq!(transition_sum_minus_variant(&q, 3).unwrap(), r(-5, 1));
    }

    #[test]
    fn transition_exhaustive_to_64() {
        for q in all_transition_triples(6) {
            for chi in (3..=15).step_by(2) {
                let beta = beta_val_closed(&q, chi).unwrap();
                assert_eq!(transition_sum(&q, chi).unwrap(), r(0, 1), "{q} chi={chi}");
                assert_eq!(transition_sum_minus_variant(&q, chi).unwrap(), -beta * 2);
            }
        }
    }

    #[test]
    fn beta_cocycle() {
        for q in all_transition_triples(5) {
            for c1 in (1..=15).step_by(2) {
                for c2 in (1..=15).step_by(2) {
                    let lhs = beta_val_closed(&q, c1 * c2).unwrap();
                    let rhs = beta_val_closed(&q, c1).unwrap() + beta_val_closed(&q.act(c1), c2).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn czero_levels() {
        assert_eq!(czero_kernel(1), 0);
        let two = CzeroSystem::build(2).solve();
        assert_eq!(two.kernel_dimension, 1);
        assert_eq!(two.kernel_basis, vec![vec!["0", "-1", "0", "1"]]);
        for level in 3..=5 {
            let res = CzeroSystem::build(level).solve();
            assert_eq!(res.kernel_dimension, 0, "level {level}");
            assert_eq!(res.rank_with_antisymmetry, res.rank);
        }
    }

    #[test]
    fn czero_dump_format() {
        let mut buf = Vec::new();
        CzeroSystem::build(1).dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("0 0 1"));
        assert!(text.lines().all(|l| l.split(' ').count() == 3));
    }

    #[test]
    fn random_triples_are_seeded() {
        let a = random_transition_triples(7, 20, 6);
        let b = random_transition_triples(7, 20, 6);
        assert_eq!(a, b);
        assert!(a.iter().all(|q| require_transition_domain(q).is_ok()));
    }

    proptest! {
        #[test]
        fn triples_sum_to_zero(a in 0i64..64, b in 0i64..64, chi in 0i64..8) {
            let q = TripleQ::from_branch(6, a, b);
            let g = q.act(2 * chi + 1);
            prop_assert!((g.rho + g.sigma + g.tau).is_zero());
        }
    }
}
