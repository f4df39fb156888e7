//! Disc data for `y^{2^n} = x^a (x-1)^b`, the series chain
//! `γ → δ → α → α̃` around the disc center, and the claims checked on it.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::colmez::{self, ColmezError, TripleQ, ZComponents};
use crate::digitsum::s as digit_sum;
use crate::report::{entries_claim, ClaimRecord, WitnessEntry};
use crate::series::{SeriesError, TruncatedSeries};
use crate::tower::{gaussian_tower, FieldTower, SqrtOutcome, TowerElement, TowerError};
use crate::valuation::Valuation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FermatError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("character value {0} is not odd")]
    InvalidChi(i64),
    #[error("truncation order {0} is below the minimum 3")]
    OrderTooSmall(usize),
    #[error("disc center violates {0}")]
    CenterInvariant(String),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Colmez(#[from] ColmezError),
}

/// Validated `(n, a, b)` with `s = n - v_2(b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BranchData {
    pub n: u32,
    pub a: u64,
    pub b: u64,
    pub s: u32,
}

impl BranchData {
    pub fn params(&self) -> Value {
        json!({ "n": self.n, "a": self.a, "b": self.b, "s": self.s })
    }

    /// `2^n`.
    pub fn modulus(&self) -> u64 {
        1 << self.n
    }

    /// The image under an odd character value: `(a', b')` reduced mod `2^n`.
    pub fn act(&self, chi: i64) -> Result<BranchData, FermatError> {
        if chi.rem_euclid(2) != 1 {
            return Err(FermatError::InvalidChi(chi));
        }
        let m = self.modulus() as i64;
        let a = (chi * self.a as i64).rem_euclid(m) as u64;
        let b = (chi * self.b as i64).rem_euclid(m) as u64;
        validate_params(self.n as i64, a as i64, b as i64)
    }

    /// `q = (a/2^n, b/2^n, -(a+b)/2^n)`.
    pub fn triple(&self) -> TripleQ {
        TripleQ::from_branch(self.n, self.a as i64, self.b as i64)
    }

    fn threshold(&self) -> Rational64 {
        Rational64::new(2 * self.n as i64 - self.s as i64 + 2, 2)
    }
}

pub fn validate_params(n: i64, a: i64, b: i64) -> Result<BranchData, FermatError> {
    if !(2..=62).contains(&n) {
        return Err(FermatError::InvalidParams(format!("n = {n} must lie in [2, 62]")));
    }
    let m = 1i64 << n;
    if a.rem_euclid(2) != 1 {
        return Err(FermatError::InvalidParams(format!("a = {a} must be odd")));
    }
    if !(0 < a && a < m) {
        return Err(FermatError::InvalidParams(format!("a = {a} must satisfy 0 < a < 2^n")));
    }
    if !(0 < b && b < m) {
        return Err(FermatError::InvalidParams(format!("b = {b} must satisfy 0 < b < 2^n")));
    }
    let vb = b.trailing_zeros() as i64;
    if !(1 <= vb && vb <= n - 2) {
        return Err(FermatError::InvalidParams(format!("v_2(b) = {vb} must satisfy 1 <= v_2(b) <= n - 2")));
    }
    Ok(BranchData { n: n as u32, a: a as u64, b: b as u64, s: (n - vb) as u32 })
}

/// Every valid `(n, a, b)` for the given `n`, in lexicographic order.
pub fn all_valid(n: u32) -> Vec<BranchData> {
    let m = 1i64 << n;
    let mut out = Vec::new();
    for a in (1..m).step_by(2) {
        for b in 1..m {
            if let Ok(d) = validate_params(n as i64, a, b) {
                out.push(d);
            }
        }
    }
    out
}

/// How a square root was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootSource {
    InTower,
    Adjoined,
    AdjoinedLocal,
}

/// A square root of `x`, extending the tower if needed.
pub fn sqrt_or_adjoin(x: &TowerElement) -> Result<(Arc<FieldTower>, TowerElement, RootSource), TowerError> {
    let tower = Arc::clone(x.tower());
    match x.try_sqrt()? {
        SqrtOutcome::InTower(r) => Ok((tower, r, RootSource::InTower)),
        SqrtOutcome::NeedsExtension => {
            let ext = tower.adjoin_sqrt(x)?;
            Ok((ext.tower, ext.root, RootSource::Adjoined))
        }
        SqrtOutcome::LocalSquare => {
            let ext = tower.adjoin_local_root(x)?;
            Ok((ext.tower, ext.root, RootSource::AdjoinedLocal))
        }
    }
}

/// Center `d` and radius element `e` of the disc, with the root choices made.
#[derive(Clone, Debug)]
pub struct DiscCenter {
    pub data: BranchData,
    pub tower: Arc<FieldTower>,
    pub i: TowerElement,
    /// The chosen `√(2^n b i)`.
    pub root: TowerElement,
    pub root_source: RootSource,
    pub d: TowerElement,
    pub e: TowerElement,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn build_center(data: BranchData) -> Result<DiscCenter, FermatError> {
    let (gauss, i) = gaussian_tower();
    let radicand = i.scale(&BigRational::from_integer(BigInt::from(data.b) << data.n));
    let (tower, root, root_source) = sqrt_or_adjoin(&radicand)?;
    let i = i.embed(&tower)?;
    debug_assert!(tower.extends(&gauss));
    let ab = (data.a + data.b) as i64;
    let d = &TowerElement::from_frac(&tower, data.a as i64, ab) + &root.scale(&ratio(1, ab * ab));
    let one_plus_i = &TowerElement::one(&tower) + &i;
    let e = one_plus_i.pow(2 * data.n as i64 - data.s as i64 + 1)?;
    let center = DiscCenter { data, tower, i, root, root_source, d, e };
    center.check_invariants()?;
    Ok(center)
}

impl DiscCenter {
    fn check_invariants(&self) -> Result<(), FermatError> {
        let n = self.data.n as i64;
        let s = self.data.s as i64;
        let one = TowerElement::one(&self.tower);
        let checks = [
            ("v(d) = 0", self.d.val(), Valuation::int(0)),
            ("v(d - 1) = n - s", (&self.d - &one).val(), Valuation::int(n - s)),
            ("v(e) = n - s/2 + 1/2", self.e.val(), Valuation::frac(2 * n - s + 1, 2)),
            ("v(√(2^n b i)) = n - s/2", self.root.val(), Valuation::frac(2 * n - s, 2)),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(FermatError::CenterInvariant(format!("{name}: got {got}")));
            }
        }
        Ok(())
    }

    /// The same disc with `e` replaced by `u·e`.
    pub fn with_e_unit(&self, u: &TowerElement) -> Result<DiscCenter, FermatError> {
        let mut c = self.clone();
        c.e = self.e.checked_mul(u)?;
        Ok(c)
    }
}

/// `γ(t) = g(d + et)`, computed as `(1 + (e/d)t)^a (1 + (e/(d-1))t)^b`.
pub fn gamma_series(center: &DiscCenter, order: usize) -> Result<TruncatedSeries, FermatError> {
    let one = TowerElement::one(&center.tower);
    let mu = center.e.checked_div(&center.d)?;
    let nu = center.e.checked_div(&(&center.d - &one))?;
    let f = binomial_power(&mu, center.data.a, order);
    let g = binomial_power(&nu, center.data.b, order);
    Ok(f.mul(&g)?)
}

/// `(1 + μt)^k` through order `L`.
fn binomial_power(mu: &TowerElement, k: u64, order: usize) -> TruncatedSeries {
    let tower = mu.tower();
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut c = BigInt::from(1);
    let mut p = TowerElement::one(tower);
    for j in 0..=order {
        if j as u64 > k {
            coeffs.push(TowerElement::zero(tower));
            continue;
        }
        coeffs.push(p.scale(&BigRational::from_integer(c.clone())));
        c = c * BigInt::from(k - j as u64) / BigInt::from(j as u64 + 1);
        p = &p * mu;
    }
    TruncatedSeries::from_coeffs(coeffs).expect("single tower")
}

/// `γ` from the literal expansion of `x^a (x-1)^b` at `x = d + et`, scaled by `d^{-a}(d-1)^{-b}`.
pub fn gamma_series_literal(center: &DiscCenter, order: usize) -> Result<TruncatedSeries, FermatError> {
    let tower = &center.tower;
    let one = TowerElement::one(tower);
    let x = TruncatedSeries::affine(center.d.clone(), center.e.clone(), order)?;
    let xm1 = TruncatedSeries::affine(&center.d - &one, center.e.clone(), order)?;
    let poly = x.pow(center.data.a).mul(&xm1.pow(center.data.b))?;
    let constant = center.d.pow(-(center.data.a as i64))?.checked_mul(&(&center.d - &one).pow(-(center.data.b as i64))?)?;
    Ok(poly.scale(&constant)?)
}

/// `δ = γ^{1/2^{n-2}}`.
pub fn delta_series(gamma: &TruncatedSeries, data: &BranchData) -> Result<TruncatedSeries, FermatError> {
    Ok(gamma.binomial_root(data.n - 2)?)
}

/// `α = δ^{1/4}` by the degree-by-degree recursion.
pub fn alpha_series(delta: &TruncatedSeries) -> Result<TruncatedSeries, FermatError> {
    Ok(delta.fourth_root_recursive()?)
}

/// `α̃ = d(1-d)α / ((d+et)(1-d-et))`.
pub fn alpha_tilde_series(alpha: &TruncatedSeries, center: &DiscCenter) -> Result<TruncatedSeries, FermatError> {
    let tower = &center.tower;
    let one = TowerElement::one(tower);
    let order = alpha.order();
    let mu = center.e.checked_div(&center.d)?;
    let nu = center.e.checked_div(&(&one - &center.d))?;
    let f = TruncatedSeries::affine(one.clone(), mu, order)?.invert()?;
    let g = TruncatedSeries::affine(one.clone(), -&nu, order)?.invert()?;
    Ok(alpha.mul(&f)?.mul(&g)?)
}

/// Every series of the chain for one parameter set.
#[derive(Clone, Debug)]
pub struct FermatCase {
    pub data: BranchData,
    pub center: DiscCenter,
    pub gamma: TruncatedSeries,
    pub delta: TruncatedSeries,
    pub alpha: TruncatedSeries,
    pub alpha_tilde: TruncatedSeries,
}

impl FermatCase {
    pub fn compute(data: BranchData, order: usize) -> Result<FermatCase, FermatError> {
        let center = build_center(data)?;
        Self::from_center(center, order)
    }

    pub fn from_center(center: DiscCenter, order: usize) -> Result<FermatCase, FermatError> {
        if order < 3 {
            return Err(FermatError::OrderTooSmall(order));
        }
        let data = center.data;
        let gamma = gamma_series(&center, order)?;
        let delta = delta_series(&gamma, &data)?;
        let alpha = alpha_series(&delta)?;
        let alpha_tilde = alpha_tilde_series(&alpha, &center)?;
        Ok(FermatCase { data, center, gamma, delta, alpha, alpha_tilde })
    }

    pub fn order(&self) -> usize {
        self.gamma.order()
    }

    pub fn z_components(&self) -> ZComponents {
        let one = TowerElement::one(&self.center.tower);
        ZComponents {
            val_d: self.center.d.val(),
            val_d_minus_1: (&self.center.d - &one).val(),
            val_e: self.center.e.val(),
            alpha_tilde: self.alpha_tilde.valuation_profile(),
        }
    }

    fn params(&self) -> Value {
        let mut p = self.data.params();
        p["order"] = json!(self.order());
        p
    }

    pub fn center_claims(&self) -> Vec<ClaimRecord> {
        let c = &self.center;
        let n = self.data.n as i64;
        let s = self.data.s as i64;
        let one = TowerElement::one(&c.tower);
        let rows = [
            ("center.v_root", "v(√(2^n b i)) = n - s/2", c.root.val(), Valuation::frac(2 * n - s, 2)),
            ("center.v_d", "v(d) = 0", c.d.val(), Valuation::int(0)),
            ("center.v_d_minus_1", "v(d - 1) = n - s", (&c.d - &one).val(), Valuation::int(n - s)),
            ("center.v_e", "v(e) = n - s/2 + 1/2", c.e.val(), Valuation::frac(2 * n - s + 1, 2)),
        ];
        rows.into_iter()
            .map(|(id, stmt, got, want)| {
                let mut w = json!({ "expected": want, "actual": got });
                w["root_source"] = json!(c.root_source);
                ClaimRecord::new(id, stmt, self.params(), got == want, w)
            })
            .collect()
    }

    /// Claims on `γ`.
    pub fn check_normalize(&self) -> Vec<ClaimRecord> {
        let g = &self.gamma;
        let n = self.data.n as i64;
        let i = &self.center.i;
        let mut out = vec![
            exact_one("gamma.c0", "c_0 = 1", g.coeff(0), self.params()),
            valuation_claim("gamma.v_c1", "v(c_1) = n + 1/2", 1, g.coeff(1), Valuation::frac(2 * n + 1, 2), self.params()),
            valuation_claim("gamma.v_c2", "v(c_2) = n", 2, g.coeff(2), Valuation::int(n), self.params()),
        ];
        let target = i.scale(&BigRational::from_integer(BigInt::from(1u64) << (self.data.n + 1)));
        out.push(ratio_congruence(
            "gamma.c1sq_over_c2",
            "c_1^2/c_2 ≡ 2^{n+1} i (mod 2^{n+2})",
            g.coeff(1),
            g.coeff(2),
            &target,
            Rational64::from_integer(n + 2),
            self.params(),
        ));
        let tail = (3..=g.order())
            .map(|l| {
                let bound = Rational64::new(2 * n + digit_sum(l as u64) as i64, 2);
                strict_entry(l, g.coeff(l).val(), bound)
            })
            .collect();
        out.push(entries_claim("gamma.tail", "v(c_l) > n + S(l)/2 for l >= 3", self.params(), tail));
        out
    }

    /// Claims on `δ`, including the re-multiplication oracle.
    pub fn check_delta(&self) -> Vec<ClaimRecord> {
        let dl = &self.delta;
        let target = self.center.i.scale_int(8);
        let mut out = vec![
            exact_one("delta.d0", "d_0 = 1", dl.coeff(0), self.params()),
            valuation_claim("delta.v_d1", "v(d_1) = 5/2", 1, dl.coeff(1), Valuation::frac(5, 2), self.params()),
            valuation_claim("delta.v_d2", "v(d_2) = 2", 2, dl.coeff(2), Valuation::int(2), self.params()),
            ratio_congruence(
                "delta.d1sq_over_d2",
                "d_1^2/d_2 ≡ 8i (mod 16)",
                dl.coeff(1),
                dl.coeff(2),
                &target,
                Rational64::from_integer(4),
                self.params(),
            ),
        ];
        let tail = (3..=dl.order())
            .map(|l| strict_entry(l, dl.coeff(l).val(), Rational64::new(4 + digit_sum(l as u64) as i64, 2)))
            .collect();
        out.push(entries_claim("delta.tail", "v(d_l) > 2 + S(l)/2 for l >= 3", self.params(), tail));
        let power = dl.pow(1 << (self.data.n - 2));
        out.push(series_equality("oracle.delta_power", "δ^{2^{n-2}} = γ", &power, &self.gamma, self.params()));
        out
    }

    /// Claims on `α`, including both oracles.
    pub fn check_alpha(&self) -> Vec<ClaimRecord> {
        let a = &self.alpha;
        let tower = &self.center.tower;
        let one_plus_i = &TowerElement::one(tower) + &self.center.i;
        let d1 = self.delta.coeff(1);
        let mut congr = Vec::new();
        let mut vals = Vec::new();
        let mut d1_pow = TowerElement::one(tower);
        for l in 1..=a.order() {
            d1_pow = &d1_pow * d1;
            let sl = digit_sum(l as u64) as i64;
            let unit = one_plus_i.pow(sl - 5 * l as i64).expect("1 + i is invertible");
            let predicted = &d1_pow * &unit;
            let threshold = Rational64::new(sl + 1, 2);
            let diff = (a.coeff(l) - &predicted).val();
            congr.push(
                WitnessEntry::new(l, "congruent", diff, diff.at_least(threshold)).with_threshold(threshold),
            );
            let want = Valuation::frac(sl, 2);
            let got = a.coeff(l).val();
            vals.push(WitnessEntry::new(l, want, got, got == want));
        }
        let mut out = vec![
            exact_one("alpha.a0", "a_0 = 1", a.coeff(0), self.params()),
            entries_claim(
                "alpha.congruence",
                "a_l ≡ d_1^l (1+i)^{S(l) - 5l} (mod (1+i)^{S(l)+1})",
                self.params(),
                congr,
            ),
            entries_claim("alpha.valuation", "v(a_l) = S(l)/2", self.params(), vals),
        ];
        out.push(series_equality("oracle.alpha_power", "α^4 = δ", &a.pow(4), &self.delta, self.params()));
        match self.delta.binomial_root(2) {
            Ok(b) => out.push(series_equality(
                "oracle.recursion_vs_binomial",
                "the recursive 4th root equals the binomial 4th root",
                a,
                &b,
                self.params(),
            )),
            Err(e) => out.push(ClaimRecord::new(
                "oracle.recursion_vs_binomial",
                "the recursive 4th root equals the binomial 4th root",
                self.params(),
                false,
                json!({ "error": e.to_string() }),
            )),
        }
        out.push(series_equality(
            "oracle.alpha_composition",
            "α^{2^n} = g(d + et)",
            &a.pow(1 << self.data.n),
            &self.gamma,
            self.params(),
        ));
        out
    }

    /// Claims on `α̃`.
    pub fn check_alpha_tilde(&self) -> Vec<ClaimRecord> {
        let at = &self.alpha_tilde;
        let vals = (1..=at.order())
            .map(|l| {
                let want = Valuation::frac(digit_sum(l as u64) as i64, 2);
                let got = at.coeff(l).val();
                WitnessEntry::new(l, want, got, got == want)
            })
            .collect();
        vec![
            exact_one("alpha_tilde.a0", "ã_0 = 1", at.coeff(0), self.params()),
            entries_claim("alpha_tilde.valuation", "v(ã_l) = v(a_l) = S(l)/2", self.params(), vals),
        ]
    }

    /// Every claim on this case.
    pub fn all_claims(&self) -> Vec<ClaimRecord> {
        let mut out = self.center_claims();
        out.extend(self.check_normalize());
        out.extend(self.check_delta());
        out.extend(self.check_alpha());
        out.extend(self.check_alpha_tilde());
        out
    }
}

fn exact_one(id: &str, stmt: &str, x: &TowerElement, params: Value) -> ClaimRecord {
    ClaimRecord::new(id, stmt, params, x.is_one(), json!({ "expected": "1", "actual": x.to_string() }))
}

fn valuation_claim(id: &str, stmt: &str, l: usize, x: &TowerElement, want: Valuation, params: Value) -> ClaimRecord {
    let got = x.val();
    entries_claim(id, stmt, params, vec![WitnessEntry::new(l, want, got, got == want)])
}

fn strict_entry(l: usize, got: Valuation, bound: Rational64) -> WitnessEntry {
    WitnessEntry::new(l, format!("> {bound}"), got, got.exceeds(bound)).with_threshold(bound)
}

/// `x^2/y ≡ ±target (mod 2^m)` for either sign of the chosen `i`.
fn ratio_congruence(
    id: &str,
    stmt: &str,
    x: &TowerElement,
    y: &TowerElement,
    target: &TowerElement,
    threshold: Rational64,
    params: Value,
) -> ClaimRecord {
    let q = match x.square().checked_div(y) {
        Ok(q) => q,
        Err(e) => return ClaimRecord::new(id, stmt, params, false, json!({ "error": e.to_string() })),
    };
    let with_i = (&q - target).val();
    let with_minus_i = (&q + target).val();
    let ok = with_i.at_least(threshold) || with_minus_i.at_least(threshold);
    let witness = json!({
        "threshold": threshold.to_string(),
        "v_with_i": with_i,
        "v_with_minus_i": with_minus_i,
    });
    ClaimRecord::new(id, stmt, params, ok, witness)
}

fn series_equality(id: &str, stmt: &str, lhs: &TruncatedSeries, rhs: &TruncatedSeries, params: Value) -> ClaimRecord {
    let order = lhs.order().min(rhs.order());
    let mismatch = (0..=order).find(|&l| lhs.coeff(l) != rhs.coeff(l));
    let witness = json!({
        "order": order,
        "first_mismatch": mismatch,
        "difference_valuation": mismatch.map(|l| (lhs.coeff(l) - rhs.coeff(l)).val()),
    });
    ClaimRecord::new(id, stmt, params, mismatch.is_none(), witness)
}

/// Valuation profiles of the whole chain with `e` replaced by `u·e`, for
/// `u ∈ {-1, i, 3, 5}`, compared with the original.
pub fn e_unit_invariance(case: &FermatCase) -> Result<ClaimRecord, FermatError> {
    let tower = &case.center.tower;
    let units = [
        ("-1", TowerElement::from_int(tower, -1)),
        ("i", case.center.i.clone()),
        ("3", TowerElement::from_int(tower, 3)),
        ("5", TowerElement::from_int(tower, 5)),
    ];
    let base = profiles(case);
    let mut mismatches = Vec::new();
    for (name, u) in units {
        let other = FermatCase::from_center(case.center.with_e_unit(&u)?, case.order())?;
        if profiles(&other) != base {
            mismatches.push(name);
        }
    }
    Ok(ClaimRecord::new(
        "series.e_unit_invariance",
        "valuation profiles do not depend on the unit factor of e",
        case.params(),
        mismatches.is_empty(),
        json!({ "mismatched_units": mismatches }),
    ))
}

fn profiles(case: &FermatCase) -> Vec<Vec<Valuation>> {
    [&case.gamma, &case.delta, &case.alpha, &case.alpha_tilde]
        .iter()
        .map(|s| s.valuation_profile())
        .collect()
}

/// The fourth roots of unity allowed for `ζ`: `±i` when `χ ≡ 3 (mod 4)`, `±1` otherwise.
fn permitted_zetas(center: &DiscCenter, chi: i64) -> Vec<(&'static str, TowerElement)> {
    let one = TowerElement::one(&center.tower);
    if chi.rem_euclid(4) == 3 {
        vec![("i", center.i.clone()), ("-i", -&center.i)]
    } else {
        vec![("1", one.clone()), ("-1", -&one)]
    }
}

/// `val(X - εY) ≥ T` for some sign `ε`, decided from `X` and `Y²` alone:
/// it holds iff `val(X² - Y²) ≥ T + min(T, val(2Y))`.
pub fn resolvent_test(x: &TowerElement, y_sq: &TowerElement, t: Rational64) -> Result<(bool, Valuation), TowerError> {
    let lhs = x.square().checked_sub(y_sq)?.val();
    let v2y = match y_sq.val() {
        Valuation::Finite(v) => v / 2 + 1,
        Valuation::Infinite => return Ok((x.val().at_least(t), x.val())),
    };
    Ok((lhs.at_least(t + t.min(v2y)), lhs))
}

/// Result of the Galois congruence check for one `(n, a, b, χ)`.
#[derive(Clone, Debug, Serialize)]
pub struct GaloisOutcome {
    pub chi: i64,
    pub a_prime: u64,
    pub b_prime: u64,
    pub claims: Vec<ClaimRecord>,
}

pub fn galois_check(data: BranchData, chi: i64) -> Result<GaloisOutcome, FermatError> {
    let center = build_center(data)?;
    galois_check_with(&center, chi)
}

pub fn galois_check_with(center: &DiscCenter, chi: i64) -> Result<GaloisOutcome, FermatError> {
    let data = center.data;
    let image = data.act(chi)?;
    let (ap, bp) = (image.a as i64, image.b as i64);
    let (a, b) = (data.a as i64, data.b as i64);
    let n = data.n as i64;
    let mut params = data.params();
    params["chi"] = json!(chi);
    params["a_prime"] = json!(ap);
    params["b_prime"] = json!(bp);
    let mut claims = Vec::new();

    // a'/(a'+b') ≡ a/(a+b) (mod 2^n)
    let diff = ratio(ap, ap + bp) - ratio(a, a + b);
    let e1_val = if diff == BigRational::from_integer(BigInt::from(0)) {
        Valuation::Infinite
    } else {
        Valuation::int(crate::series::rational_v2(&diff))
    };
    claims.push(ClaimRecord::new(
        "galois.e1",
        "a'/(a'+b') ≡ a/(a+b) (mod 2^n)",
        params.clone(),
        e1_val.at_least(Rational64::from_integer(n)),
        json!({ "valuation": e1_val, "threshold": n }),
    ));

    let base = &center.tower;
    let t = data.threshold();
    let ab = a + b;
    let apbp = ap + bp;
    let w = &center.root;
    let scaled_w = w.scale(&ratio(1, ab * ab));
    let const_part = TowerElement::from_frac(base, a, ab);
    let const_prime = TowerElement::from_frac(base, ap, apbp);
    let zetas = permitted_zetas(center, chi);
    let gamma_d: Vec<(&str, TowerElement)> =
        zetas.iter().map(|(name, z)| (*name, &const_part + &(z * &scaled_w))).collect();

    // Explicit route: adjoin √(b'/b) so that √(2^n b' i) = √(2^n b i)·√(b'/b).
    let r = TowerElement::from_frac(base, bp, b);
    let (ext, rho, source) = sqrt_or_adjoin(&r)?;
    let w_prime = w.embed(&ext)?.checked_mul(&rho)?;
    let const_prime_ext = const_prime.embed(&ext)?;
    let mut explicit = Vec::new();
    let mut explicit_found = false;
    for (name, gd) in &gamma_d {
        let gd = gd.embed(&ext)?;
        let mut best = Valuation::Finite(Rational64::from_integer(i64::MIN / 4));
        let mut found = false;
        for sign in [1i64, -1] {
            let d_prime = &const_prime_ext + &w_prime.scale(&ratio(sign, apbp * apbp));
            let v = (&gd - &d_prime).val();
            best = best.max(v);
            found |= v.at_least(t);
        }
        explicit_found |= found;
        explicit.push(json!({ "zeta": name, "best_valuation": best, "holds": found }));
    }
    claims.push(ClaimRecord::new(
        "galois.congruence",
        "γ(d) ≡ d' (mod 2^{n - s/2 + 1}) for a permitted ζ and root choice",
        params.clone(),
        explicit_found,
        json!({ "threshold": t.to_string(), "root_source": source, "per_zeta": explicit }),
    ));

    // Resolvent route, inside the original tower.
    let y_sq = center.i.scale(&BigRational::from_integer(BigInt::from(bp) << data.n));
    let scale = BigRational::from_integer(BigInt::from(apbp * apbp));
    let mut agree = true;
    let mut resolvent = Vec::new();
    for ((name, gd), row) in gamma_d.iter().zip(&explicit) {
        let x = (gd - &const_prime).scale(&scale);
        let (holds, v) = resolvent_test(&x, &y_sq, t)?;
        agree &= holds == row["holds"].as_bool().unwrap_or(false);
        resolvent.push(json!({ "zeta": name, "norm_valuation": v, "holds": holds }));
    }
    claims.push(ClaimRecord::new(
        "galois.resolvent_agrees",
        "the extension-free resolvent test agrees with the explicit root choices",
        params.clone(),
        agree,
        json!({ "threshold": (t * 2).to_string(), "per_zeta": resolvent }),
    ));

    claims.push(e0_claim(center, &ext, &w_prime, chi, image, params)?);
    Ok(GaloisOutcome { chi, a_prime: image.a, b_prime: image.b, claims })
}

/// `d' ≡ a/(a+b) + χ^{-3/2}√(2^n b i)/(a+b)^2 (mod 2^n)` for some choices of
/// `√χ` and of `√(2^n b' i)`, by adjoining `√χ`; the resolvent form is
/// checked alongside.
fn e0_claim(
    center: &DiscCenter,
    ext: &Arc<FieldTower>,
    w_prime: &TowerElement,
    chi: i64,
    image: BranchData,
    params: Value,
) -> Result<ClaimRecord, FermatError> {
    let data = center.data;
    let (a, b) = (data.a as i64, data.b as i64);
    let (ap, bp) = (image.a as i64, image.b as i64);
    let n = Rational64::from_integer(data.n as i64);
    let chi_el = TowerElement::from_int(ext, chi);
    let (ext2, sqrt_chi, source) = sqrt_or_adjoin(&chi_el)?;
    let w = center.root.embed(&ext2)?;
    let w_prime2 = w_prime.embed(&ext2)?;
    let base_const = TowerElement::from_frac(&ext2, a, a + b);
    let prime_const = TowerElement::from_frac(&ext2, ap, ap + bp);
    let chi_factor = sqrt_chi.scale(&ratio(1, chi * chi * (a + b) * (a + b)));
    let mut explicit_best = Vec::new();
    let mut explicit = false;
    let mut resolvent = false;
    let y_sq = w.square().scale(&BigRational::from_integer(BigInt::from(chi)));
    for sign in [1i64, -1] {
        let d_prime = &prime_const + &w_prime2.scale(&ratio(sign, (ap + bp) * (ap + bp)));
        let mut best = Valuation::Finite(Rational64::from_integer(i64::MIN / 4));
        for root_sign in [1i64, -1] {
            let rhs = &base_const + &(&chi_factor * &w).scale_int(root_sign);
            let v = (&d_prime - &rhs).val();
            best = best.max(v);
            explicit |= v.at_least(n);
        }
        explicit_best.push(best);
        let x = (&d_prime - &base_const).scale(&BigRational::from_integer(BigInt::from(chi * chi * (a + b) * (a + b))));
        resolvent |= resolvent_test(&x, &y_sq, n)?.0;
    }
    Ok(ClaimRecord::new(
        "galois.e0",
        "d' ≡ a/(a+b) + χ^{-3/2}√(2^n b i)/(a+b)^2 (mod 2^n)",
        params,
        explicit && resolvent,
        json!({
            "threshold": n.to_string(),
            "sqrt_chi_source": source,
            "best_valuation_per_root_of_b_prime": explicit_best,
            "explicit": explicit,
            "resolvent": resolvent,
        }),
    ))
}

/// Cross-check of the closed form of `v(β_γ(q))` against the `z_{ℓ_i}`
/// valuations of the two suite cases `q` and `γq`, for `i = 0..=max_i`.
/// `comps` and `comps_image` come from the cases `(n, a, b)` and `(n, a', b')`.
pub fn beta_cross_check(
    data: BranchData,
    chi: i64,
    comps: &ZComponents,
    comps_image: &ZComponents,
    max_i: u32,
) -> Result<Vec<ClaimRecord>, FermatError> {
    let image = data.act(chi)?;
    let q = data.triple();
    let gq = image.triple();
    let (_, n, s) = colmez::branch_shape(&q)?;
    if (n, s) != (data.n, data.s) || image.s != data.s {
        return Err(FermatError::InvalidParams(format!("triple {q} does not have the branch shape of {data:?}")));
    }
    let mut params = data.params();
    params["chi"] = json!(chi);
    params["a_prime"] = json!(image.a);
    params["b_prime"] = json!(image.b);

    let closed = colmez::beta_val_closed(&q, chi)?;
    let rearranged = colmez::beta_rearranged(&q, chi, n, s);
    let from_eps = colmez::beta_from_z_difference(&q, chi, n, s)?;
    let mut out = vec![ClaimRecord::new(
        "beta.rearrangement",
        "closed form = (n-s)(⟨σ⟩-⟨γσ⟩) + n(ε_{γq}-ε_q) = n(⟨γρ⟩-⟨ρ⟩) + s(⟨γσ⟩-⟨σ⟩) + n(⟨γτ⟩-⟨τ⟩)",
        params.clone(),
        closed == rearranged && closed == from_eps,
        json!({ "closed": closed.to_string(), "epsilon_form": from_eps.to_string(), "rearranged": rearranged.to_string() }),
    )];

    let mut diff_entries = Vec::new();
    let mut obs_q = Vec::new();
    let mut obs_gq = Vec::new();
    let mut tilde = Vec::new();
    for i in 0..=max_i {
        let zq = colmez::z_valuation(&q, n, s, i, comps)?;
        let zg = colmez::z_valuation(&gq, n, s, i, comps_image)?;
        let diff = zq.formula - zg.formula;
        diff_entries.push(WitnessEntry::new(zq.l, closed, diff, diff == closed));
        let observed_diff = zq.observed.finite().zip(zg.observed.finite()).map(|(x, y)| x - y);
        obs_q.push(WitnessEntry::new(zq.l, zq.formula, zq.observed, zq.observed == Valuation::Finite(zq.formula)));
        obs_gq.push(WitnessEntry::new(zg.l, zg.formula, zg.observed, zg.observed == Valuation::Finite(zg.formula)));
        let half_i = Valuation::frac(i as i64, 2);
        let ok = zq.alpha_tilde == half_i && zg.alpha_tilde == half_i && observed_diff == Some(closed);
        tilde.push(WitnessEntry::new(zq.l, half_i, format!("{} / {}", zq.alpha_tilde, zg.alpha_tilde), ok));
    }
    out.push(entries_claim(
        "beta.formula_difference",
        "z-formula(q, i) - z-formula(γq, i) equals the closed form for every i",
        params.clone(),
        diff_entries,
    ));
    out.push(entries_claim("beta.z_observed_q", "observed v(z_{ℓ_i}) equals the formula at q", params.clone(), obs_q));
    out.push(entries_claim("beta.z_observed_image", "observed v(z_{ℓ_i}) equals the formula at γq", params.clone(), obs_gq));
    out.push(entries_claim(
        "beta.alpha_tilde_component",
        "v(ã_{ℓ_i}) = i/2 at q and γq, and the observed difference is the closed form",
        params,
        tilde,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_cross_check_smallest_case() {
        let d = validate_params(3, 1, 2).unwrap();
        let c = FermatCase::compute(d, 32).unwrap().z_components();
        let img = FermatCase::compute(d.act(3).unwrap(), 32).unwrap().z_components();
        let claims = beta_cross_check(d, 3, &c, &img, 5).unwrap();
        assert!(claims.iter().all(ClaimRecord::passed), "{claims:#?}");
        assert_eq!(claims[0].witness["closed"], "5/2");
    }

    #[test]
    fn validation() {
        assert_eq!(validate_params(3, 1, 2).unwrap().s, 2);
        assert_eq!(validate_params(4, 3, 4).unwrap().s, 2);
        assert!(matches!(validate_params(3, 2, 2), Err(FermatError::InvalidParams(m)) if m.contains("odd")));
        assert!(validate_params(3, 1, 4).is_err());
        assert!(validate_params(3, 9, 2).is_err());
        assert_eq!(all_valid(3).len(), 8);
        assert_eq!(all_valid(4).len(), 48);
        assert_eq!(all_valid(5).len(), 224);
    }

    #[test]
    fn character_action() {
        let d = validate_params(3, 1, 2).unwrap();
        let img = d.act(5).unwrap();
        assert_eq!((img.a, img.b), (5, 2));
        assert_eq!(d.act(4).unwrap_err(), FermatError::InvalidChi(4));
    }

    #[test]
    fn center_for_smallest_case() {
        let c = build_center(validate_params(3, 1, 2).unwrap()).unwrap();
        assert_eq!(c.root.val(), Valuation::int(2));
        assert_eq!(c.e.val(), Valuation::frac(5, 2));
        let one = TowerElement::one(&c.tower);
        assert_eq!((&c.d - &one).val(), Valuation::int(1));
        assert_eq!(c.root.square(), c.i.scale_int(16));
    }

    #[test]
    fn local_square_root_case() {
        // 2^4·14·i is a square in Q_2(i) but not in Q(i)
        let c = build_center(validate_params(4, 1, 14).unwrap()).unwrap();
        assert_eq!(c.root_source, RootSource::AdjoinedLocal);
        assert_eq!(c.root.val(), Valuation::frac(5, 2));
    }

    #[test]
    fn gamma_low_coefficients() {
        let case = FermatCase::compute(validate_params(3, 1, 2).unwrap(), 8).unwrap();
        assert!(case.gamma.coeff(0).is_one());
        assert_eq!(case.gamma.coeff(1).val(), Valuation::frac(7, 2));
        assert_eq!(case.gamma.coeff(2).val(), Valuation::int(3));
    }

    #[test]
    fn gamma_routes_agree() {
        for (n, a, b) in [(3, 1, 2), (3, 7, 6), (4, 3, 4), (4, 5, 14)] {
            let c = build_center(validate_params(n, a, b).unwrap()).unwrap();
            assert_eq!(gamma_series(&c, 10).unwrap(), gamma_series_literal(&c, 10).unwrap(), "{n} {a} {b}");
        }
    }

    #[test]
    fn small_cases_pass_all_claims() {
        for (n, a, b) in [(3, 1, 2), (4, 3, 4), (4, 1, 14)] {
            let case = FermatCase::compute(validate_params(n, a, b).unwrap(), 16).unwrap();
            for claim in case.all_claims() {
                assert!(claim.passed(), "{} failed: {}", claim.id, claim.witness);
            }
        }
    }

    #[test]
    fn e_unit_invariance_small() {
        let case = FermatCase::compute(validate_params(3, 3, 2).unwrap(), 10).unwrap();
        assert!(e_unit_invariance(&case).unwrap().passed());
    }

    #[test]
    fn galois_examples() {
        let d = validate_params(3, 1, 2).unwrap();
        let trivial = galois_check(d, 1).unwrap();
        assert_eq!((trivial.a_prime, trivial.b_prime), (1, 2));
        assert!(trivial.claims.iter().all(ClaimRecord::passed));
        let three = galois_check(d, 3).unwrap();
        assert!(three.claims.iter().all(ClaimRecord::passed), "{:#?}", three.claims);
        assert_eq!(galois_check(d, 2).unwrap_err(), FermatError::InvalidChi(2));
    }

    #[test]
    fn resolvent_matches_sign_search() {
        // Q(i)(√(16 i)): compare the resolvent test with explicit signs.
        let c = build_center(validate_params(3, 1, 2).unwrap()).unwrap();
        let y = &c.root;
        let y_sq = y.square();
        for k in -6..6 {
            let x = y + &TowerElement::from_int(&c.tower, 1 << (k + 6)).scale(&ratio(1, 64));
            for t in 1..8 {
                let t = Rational64::from_integer(t);
                let direct = (&x - y).val().at_least(t) || (&x + y).val().at_least(t);
                assert_eq!(resolvent_test(&x, &y_sq, t).unwrap().0, direct, "k={k} t={t}");
            }
        }
    }
}
