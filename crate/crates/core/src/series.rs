//! Truncated power series `Σ_{ℓ ≤ L} c_ℓ t^ℓ` with tower coefficients.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::tower::{FieldTower, TowerElement, TowerError};
use crate::valuation::Valuation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series coefficients belong to different towers")]
    TowerMismatch,
    #[error("constant term is not invertible")]
    NonUnitConstantTerm,
    #[error("constant term is not 1")]
    ConstantTermNotOne,
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// Coefficients of `t^0 … t^L`; `L` is the truncation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<TowerElement>,
}

impl TruncatedSeries {
    /// Build from coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<TowerElement>) -> Result<Self, SeriesError> {
        assert!(!coeffs.is_empty(), "a series needs at least a constant term");
        let id = coeffs[0].tower().id();
        if coeffs.iter().any(|c| c.tower().id() != id) {
            return Err(SeriesError::TowerMismatch);
        }
        Ok(TruncatedSeries { coeffs })
    }

    /// Polynomial coefficients padded with zeros (or cut) to the given order.
    pub fn from_poly(tower: &Arc<FieldTower>, mut coeffs: Vec<TowerElement>, order: usize) -> Result<Self, SeriesError> {
        coeffs.resize(order + 1, TowerElement::zero(tower));
        Self::from_coeffs(coeffs)
    }

    pub fn constant(c: TowerElement, order: usize) -> Self {
        let zero = TowerElement::zero(c.tower());
        let mut coeffs = vec![zero; order + 1];
        coeffs[0] = c;
        TruncatedSeries { coeffs }
    }

    pub fn one(tower: &Arc<FieldTower>, order: usize) -> Self {
        Self::constant(TowerElement::one(tower), order)
    }

    /// `c0 + c1·t`.
    pub fn affine(c0: TowerElement, c1: TowerElement, order: usize) -> Result<Self, SeriesError> {
        let tower = Arc::clone(c0.tower());
        Self::from_poly(&tower, vec![c0, c1], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        self.coeffs[0].tower()
    }

    pub fn coeff(&self, l: usize) -> &TowerElement {
        &self.coeffs[l]
    }

    pub fn coeffs(&self) -> &[TowerElement] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        TruncatedSeries { coeffs: self.coeffs[..=order].to_vec() }
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.tower().id() == other.tower().id() {
            Ok(())
        } else {
            Err(SeriesError::TowerMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let order = self.order().min(other.order());
        let coeffs = (0..=order).map(|l| &self.coeffs[l] + &other.coeffs[l]).collect();
        Ok(TruncatedSeries { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let order = self.order().min(other.order());
        let coeffs = (0..=order).map(|l| &self.coeffs[l] - &other.coeffs[l]).collect();
        Ok(TruncatedSeries { coeffs })
    }

    pub fn scale(&self, c: &TowerElement) -> Result<Self, SeriesError> {
        let coeffs = self.coeffs.iter().map(|x| x.checked_mul(c)).collect::<Result<_, _>>()?;
        Ok(TruncatedSeries { coeffs })
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|x| x.scale(r)).collect() }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let order = self.order().min(other.order());
        Ok(mul_to(&self.coeffs, &other.coeffs, order))
    }

    pub fn square(&self) -> Self {
        mul_to(&self.coeffs, &self.coeffs, self.order())
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = Self::one(self.tower(), self.order());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = mul_to(&acc.coeffs, &base.coeffs, self.order());
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let c0_inv = self.coeffs[0].inv().map_err(|_| SeriesError::NonUnitConstantTerm)?;
        let mut out: Vec<TowerElement> = Vec::with_capacity(self.coeffs.len());
        out.push(c0_inv.clone());
        for l in 1..=self.order() {
            let mut acc = TowerElement::zero(self.tower());
            for k in 1..=l {
                if self.coeffs[k].is_zero() || out[l - k].is_zero() {
                    continue;
                }
                acc = &acc + &(&self.coeffs[k] * &out[l - k]);
            }
            out.push(-(&acc * &c0_inv));
        }
        Ok(TruncatedSeries { coeffs: out })
    }

    fn require_unit_constant(&self) -> Result<(), SeriesError> {
        if self.coeffs[0].is_one() {
            Ok(())
        } else {
            Err(SeriesError::ConstantTermNotOne)
        }
    }

    /// `Σ_j C(1/2^m, j) w^j` with `w = f - 1`, summed up to the truncation order.
    pub fn binomial_root(&self, m: u32) -> Result<Self, SeriesError> {
        self.require_unit_constant()?;
        let order = self.order();
        if m == 0 {
            return Ok(self.clone());
        }
        let tower = Arc::clone(self.tower());
        let mut w = self.clone();
        w.coeffs[0] = TowerElement::zero(&tower);
        let exponent = BigRational::new(BigInt::one(), BigInt::one() << m);
        let binom = binomial_coefficients(&exponent, order);
        // Horner in w: P_j = C_j + w·P_{j+1}. Since w = O(t), P_j is only
        // needed through order L - j.
        let mut p = vec![TowerElement::from_ratio(&tower, &binom[order])];
        for j in (0..order).rev() {
            let keep = order - j;
            let mut next = mul_to(&w.coeffs[..=keep], &pad(&p, keep, &tower), keep).coeffs;
            next[0] = &next[0] + &TowerElement::from_ratio(&tower, &binom[j]);
            p = next;
        }
        Ok(TruncatedSeries { coeffs: p })
    }

    /// Fourth root by solving `(1 + Σ a_ℓ t^ℓ)^4 = 1 + Σ d_ℓ t^ℓ` for `a_ℓ`
    /// one degree at a time, using the expanded multinomial identity.
    pub fn fourth_root_recursive(&self) -> Result<Self, SeriesError> {
        self.require_unit_constant()?;
        let tower = Arc::clone(self.tower());
        let order = self.order();
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        let mut a: Vec<TowerElement> = vec![TowerElement::one(&tower)];
        for l in 1..=order {
            // Each term: (coefficient, factors); a_ℓ = d_ℓ/4 minus the sum.
            let mut terms: Vec<(BigRational, Vec<&TowerElement>)> = vec![(q(-1, 4), vec![&self.coeffs[l]])];
            if l % 2 == 0 {
                terms.push((q(3, 2), vec![&a[l / 2], &a[l / 2]]));
            }
            if l % 3 == 0 {
                terms.push((q(1, 1), vec![&a[l / 3]; 3]));
            }
            if l % 4 == 0 {
                terms.push((q(1, 4), vec![&a[l / 4]; 4]));
            }
            // ℓ₁ + ℓ₂ = ℓ, ℓ₁ < ℓ₂
            for l1 in 1..l {
                let l2 = l - l1;
                if l1 < l2 {
                    terms.push((q(3, 1), vec![&a[l1], &a[l2]]));
                }
            }
            // ℓ₁ + ℓ₂ + ℓ₃ = ℓ, ℓ₁ < ℓ₂ < ℓ₃
            for l1 in 1..l {
                for l2 in (l1 + 1)..l {
                    if l1 + 2 * l2 >= l {
                        break;
                    }
                    terms.push((q(6, 1), vec![&a[l1], &a[l2], &a[l - l1 - l2]]));
                }
            }
            // ℓ₁ + 2ℓ₂ = ℓ, ℓ₁ ≠ ℓ₂
            for l2 in 1..l {
                if 2 * l2 >= l {
                    break;
                }
                let l1 = l - 2 * l2;
                if l1 != l2 {
                    terms.push((q(3, 1), vec![&a[l1], &a[l2], &a[l2]]));
                }
            }
            // ℓ₁ + 3ℓ₂ = ℓ, ℓ₁ ≠ ℓ₂
            for l2 in 1..l {
                if 3 * l2 >= l {
                    break;
                }
                let l1 = l - 3 * l2;
                if l1 != l2 {
                    terms.push((q(1, 1), vec![&a[l1], &a[l2], &a[l2], &a[l2]]));
                }
            }
            // four distinct parts, increasing
            for l1 in 1..l {
                for l2 in (l1 + 1)..l {
                    for l3 in (l2 + 1)..l {
                        if l1 + l2 + 2 * l3 >= l {
                            break;
                        }
                        terms.push((q(6, 1), vec![&a[l1], &a[l2], &a[l3], &a[l - l1 - l2 - l3]]));
                    }
                }
            }
            // ℓ₁ + ℓ₂ + 2ℓ₃ = ℓ, ℓ₁ < ℓ₂, ℓ₃ ∉ {ℓ₁, ℓ₂}
            for l3 in 1..l {
                if 2 * l3 + 3 > l {
                    break;
                }
                let rest = l - 2 * l3;
                for l1 in 1..rest {
                    let l2 = rest - l1;
                    if l1 < l2 && l3 != l1 && l3 != l2 {
                        terms.push((q(3, 1), vec![&a[l1], &a[l2], &a[l3], &a[l3]]));
                    }
                }
            }
            // 2ℓ₁ + 2ℓ₂ = ℓ, ℓ₁ < ℓ₂
            if l % 2 == 0 {
                let half = l / 2;
                for l1 in 1..half {
                    let l2 = half - l1;
                    if l1 < l2 {
                        terms.push((q(3, 2), vec![&a[l1], &a[l1], &a[l2], &a[l2]]));
                    }
                }
            }
            let sum = TowerElement::linear_combination(&tower, terms)?;
            a.push(-sum);
        }
        Ok(TruncatedSeries { coeffs: a })
    }

    /// Exact valuation of every coefficient.
    pub fn valuation_profile(&self) -> Vec<Valuation> {
        self.coeffs.iter().map(TowerElement::val).collect()
    }

    pub fn embed(&self, target: &Arc<FieldTower>) -> Result<Self, SeriesError> {
        let coeffs = self.coeffs.iter().map(|c| c.embed(target)).collect::<Result<_, _>>()?;
        Ok(TruncatedSeries { coeffs })
    }
}

fn pad(p: &[TowerElement], order: usize, tower: &Arc<FieldTower>) -> Vec<TowerElement> {
    let mut v = p.to_vec();
    v.resize(order + 1, TowerElement::zero(tower));
    v
}

fn mul_to(x: &[TowerElement], y: &[TowerElement], order: usize) -> TruncatedSeries {
    let tower = Arc::clone(x[0].tower());
    let coeffs = (0..=order)
        .map(|l| {
            let lo = l.saturating_sub(y.len() - 1);
            let hi = l.min(x.len() - 1);
            let pairs = (lo..=hi).map(|i| (&x[i], &y[l - i]));
            TowerElement::dot(&tower, pairs).expect("single tower")
        })
        .collect();
    TruncatedSeries { coeffs }
}

/// `C(r, j)` for `0 ≤ j ≤ n`.
pub fn binomial_coefficients(r: &BigRational, n: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c = BigRational::one();
    out.push(c.clone());
    for j in 0..n {
        let k = BigRational::from_integer(BigInt::from(j));
        c = c * (r - &k) / (k + BigRational::one());
        out.push(c.clone());
    }
    out
}

/// 2-adic valuation of a nonzero rational.
pub fn rational_v2(r: &BigRational) -> i64 {
    if r.is_zero() {
        panic!("valuation of zero");
    }
    r.numer().trailing_zeros().unwrap() as i64 - r.denom().trailing_zeros().unwrap() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitsum::s;
    use crate::tower::gaussian_tower;
    use proptest::prelude::*;

    fn q() -> Arc<FieldTower> {
        FieldTower::rationals()
    }

    fn int_series(t: &Arc<FieldTower>, cs: &[i64], order: usize) -> TruncatedSeries {
        let v = cs.iter().map(|&c| TowerElement::from_int(t, c)).collect();
        TruncatedSeries::from_poly(t, v, order).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn products() {
        let t = q();
        let a = int_series(&t, &[1, 1], 4);
        let b = int_series(&t, &[1, -1], 4);
        assert_eq!(a.mul(&b).unwrap(), int_series(&t, &[1, 0, -1], 4));
        assert_eq!(a.mul(&TruncatedSeries::one(&t, 4)).unwrap(), a);
        assert_eq!(a.square(), int_series(&t, &[1, 2, 1], 4));
        // truncation at the smaller order
        assert_eq!(a.mul(&b.truncate(1)).unwrap().order(), 1);
    }

    #[test]
    fn inverses() {
        let t = q();
        let geometric = int_series(&t, &[1, -1], 5).invert().unwrap();
        assert_eq!(geometric, int_series(&t, &[1, 1, 1, 1, 1, 1], 5));
        let alt = int_series(&t, &[1, 2], 4).invert().unwrap();
        assert_eq!(alt, int_series(&t, &[1, -2, 4, -8, 16], 4));
        let c = TruncatedSeries::constant(TowerElement::from_int(&t, 3), 3).invert().unwrap();
        assert_eq!(c.coeff(0), &TowerElement::from_frac(&t, 1, 3));
        assert!(c.coeffs()[1..].iter().all(TowerElement::is_zero));
        assert_eq!(
            int_series(&t, &[0, 1], 3).invert().unwrap_err(),
            SeriesError::NonUnitConstantTerm
        );
    }

    #[test]
    fn square_root_of_one_plus_t() {
        let t = q();
        let f = int_series(&t, &[1, 1], 3);
        let r = f.binomial_root(1).unwrap();
        let expected: Vec<_> = [rat(1, 1), rat(1, 2), rat(-1, 8), rat(1, 16)]
            .iter()
            .map(|c| TowerElement::from_ratio(&t, c))
            .collect();
        assert_eq!(r.coeffs(), expected.as_slice());
        assert_eq!(f.binomial_root(0).unwrap(), f);
        assert_eq!(int_series(&t, &[2, 1], 3).binomial_root(1).unwrap_err(), SeriesError::ConstantTermNotOne);
    }

    #[test]
    fn binomial_coefficient_valuations() {
        // v(C(1/2^{n-2}, j)) = S(j) + j - jn
        for n in 3..=6u32 {
            let r = BigRational::new(BigInt::one(), BigInt::one() << (n - 2));
            let cs = binomial_coefficients(&r, 40);
            for (j, c) in cs.iter().enumerate().skip(1) {
                let j = j as i64;
                assert_eq!(rational_v2(c), s(j as u64) as i64 + j - j * n as i64, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn recursion_low_coefficients() {
        let (t, i) = gaussian_tower();
        let d1 = &TowerElement::from_int(&t, 4) + &i.scale_int(4);
        let d2 = TowerElement::from_frac(&t, 5, 3);
        let d3 = i.scale_int(7);
        let delta = TruncatedSeries::from_poly(&t, vec![TowerElement::one(&t), d1.clone(), d2.clone(), d3], 6).unwrap();
        let a = delta.fourth_root_recursive().unwrap();
        assert_eq!(a.coeff(1), &d1.scale(&rat(1, 4)));
        assert_eq!(a.coeff(2), &(&d2.scale(&rat(1, 4)) - &d1.square().scale(&rat(3, 32))));
        assert_eq!(a, delta.binomial_root(2).unwrap());
        assert_eq!(a.pow(4), delta);
    }

    #[test]
    fn valuation_profiles() {
        let (t, i) = gaussian_tower();
        let one = TruncatedSeries::one(&t, 2);
        assert_eq!(one.valuation_profile(), vec![Valuation::int(0), Valuation::Infinite, Valuation::Infinite]);
        let f = TruncatedSeries::affine(TowerElement::zero(&t), &TowerElement::one(&t) + &i, 1).unwrap();
        assert_eq!(f.valuation_profile(), vec![Valuation::Infinite, Valuation::frac(1, 2)]);
    }

    #[test]
    fn mismatched_towers() {
        let a = TruncatedSeries::one(&q(), 2);
        let b = TruncatedSeries::one(&q(), 2);
        assert_eq!(a.mul(&b).unwrap_err(), SeriesError::TowerMismatch);
    }

    fn gaussian_series(coeffs: &[(i64, i64)], den: i64) -> TruncatedSeries {
        let (t, i) = gaussian_tower();
        let mut v = vec![TowerElement::one(&t)];
        for &(re, im) in coeffs {
            v.push(&TowerElement::from_frac(&t, re, den) + &i.scale(&rat(im, den)));
        }
        let order = v.len() - 1;
        TruncatedSeries::from_poly(&t, v, order).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn root_power_roundtrip(
            coeffs in prop::collection::vec((-20i64..20, -20i64..20), 1..6),
            den in 1i64..9,
            m in 0u32..=4,
        ) {
            let f = gaussian_series(&coeffs, den);
            let r = f.binomial_root(m).unwrap();
            prop_assert_eq!(r.pow(1 << m), f);
        }

        #[test]
        fn recursion_matches_binomial(coeffs in prop::collection::vec((-20i64..20, -20i64..20), 1..8)) {
            let f = gaussian_series(&coeffs, 1);
            prop_assert_eq!(f.fourth_root_recursive().unwrap(), f.binomial_root(2).unwrap());
        }

        #[test]
        fn inverse_roundtrip(coeffs in prop::collection::vec((-20i64..20, -20i64..20), 1..8), den in 1i64..5) {
            let f = gaussian_series(&coeffs, den);
            let one = TruncatedSeries::one(f.tower(), f.order());
            prop_assert_eq!(f.invert().unwrap().mul(&f).unwrap(), one);
        }
    }
}
