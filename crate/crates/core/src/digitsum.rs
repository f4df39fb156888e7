//! Binary digit sums and the combinatorial facts about them used by the
//! series estimates.

use std::fmt;
use std::ops::Add;

use num_rational::Rational64;
use num_traits::Signed;
use serde::{Serialize, Serializer};

/// A nonnegative integer or infinity. `Finite(_) < Infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Finite(u64),
    Infinity,
}

impl ExtNat {
    pub fn finite(self) -> Option<u64> {
        match self {
            ExtNat::Finite(v) => Some(v),
            ExtNat::Infinity => None,
        }
    }
}

impl Add for ExtNat {
    type Output = ExtNat;

    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (ExtNat::Finite(a), ExtNat::Finite(b)) => ExtNat::Finite(a + b),
            _ => ExtNat::Infinity,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(v) => write!(f, "{v}"),
            ExtNat::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNat::Finite(v) => serializer.serialize_u64(*v),
            ExtNat::Infinity => serializer.serialize_str("inf"),
        }
    }
}

/// `S(ℓ)` for a rational `ℓ`: the binary digit sum on `{0, 1, 2, …}`, infinity elsewhere.
pub fn digit_sum(l: Rational64) -> ExtNat {
    if l.is_integer() && !l.is_negative() {
        ExtNat::Finite(s(l.to_integer() as u64))
    } else {
        ExtNat::Infinity
    }
}

/// `S(ℓ)` on machine integers.
#[inline]
pub fn s(l: u64) -> u64 {
    l.count_ones() as u64
}

/// `S(ℓ/k)`, infinite unless `k` divides `ℓ`.
pub fn s_div(l: u64, k: u64) -> ExtNat {
    if l.is_multiple_of(k) {
        ExtNat::Finite(s(l / k))
    } else {
        ExtNat::Infinity
    }
}

pub fn is_power_of_two(l: u64) -> bool {
    l.is_power_of_two()
}

/// Ordered pairs of positive integers `(ℓ₁, ℓ₂)` with `ℓ₁ + ℓ₂ = ℓ` and no carries.
pub fn equality_pairs(l: u64) -> Vec<(u64, u64)> {
    (1..l).filter(|&l1| s(l1) + s(l - l1) == s(l)).map(|l1| (l1, l - l1)).collect()
}

/// `2^{S(ℓ)} - 2`, the expected size of [`equality_pairs`].
pub fn expected_pair_count(l: u64) -> u64 {
    (1u64 << s(l)) - 2
}

/// First `(ℓ₁, ℓ₂)` in `[0, max]²` violating subadditivity, or strictness on the diagonal.
pub fn subadditivity_violation(max: u64) -> Option<(u64, u64)> {
    for l1 in 0..=max {
        let s1 = s(l1);
        for l2 in 0..=max {
            let lhs = s(l1 + l2);
            let rhs = s1 + s(l2);
            if lhs > rhs || (l1 == l2 && l1 > 0 && lhs == rhs) {
                return Some((l1, l2));
            }
        }
    }
    None
}

/// First `ℓ ≤ max` where `S(2ℓ) != S(ℓ)`.
pub fn scaling_violation(max: u64) -> Option<u64> {
    (0..=max).find(|&l| s(2 * l) != s(l))
}

/// First `ℓ ≤ max` whose carry-free pair count differs from `2^{S(ℓ)} - 2`.
pub fn pair_count_violation(max: u64) -> Option<(u64, u64)> {
    (1..=max)
        .map(|l| (l, equality_pairs(l).len() as u64))
        .find(|&(l, c)| c != expected_pair_count(l))
}

/// The eight statements about decompositions of `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Part {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl Part {
    pub const ALL: [Part; 8] =
        [Part::I, Part::II, Part::III, Part::IV, Part::V, Part::VI, Part::VII, Part::VIII];

    pub fn label(self) -> &'static str {
        match self {
            Part::I => "i",
            Part::II => "ii",
            Part::III => "iii",
            Part::IV => "iv",
            Part::V => "v",
            Part::VI => "vi",
            Part::VII => "vii",
            Part::VIII => "viii",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub l: u64,
    pub parts: Vec<u64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartResult {
    pub part: Part,
    /// Number of values of `ℓ` checked.
    pub checked: u64,
    pub counterexample: Option<Counterexample>,
}

impl PartResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PossibilitiesReport {
    pub l_max: u64,
    pub parts: Vec<PartResult>,
}

impl PossibilitiesReport {
    pub fn passed(&self) -> bool {
        self.parts.iter().all(PartResult::passed)
    }

    pub fn part(&self, p: Part) -> &PartResult {
        self.parts.iter().find(|r| r.part == p).expect("every part is reported")
    }
}

// All inequalities below are doubled so they stay in the integers:
// "½X ≤ ½S(ℓ)" becomes "X ≤ S(ℓ)".

/// `2S(ℓ/4) - 2 ≤ ½S(ℓ)`.
pub fn part_i_predicate(l: u64) -> bool {
    match s_div(l, 4) {
        ExtNat::Finite(q) => 4 * q <= s(l) + 4,
        ExtNat::Infinity => false,
    }
}

/// `S(ℓ/2) - 1 ≤ ½S(ℓ)`.
pub fn part_ii_predicate(l: u64) -> bool {
    match s_div(l, 2) {
        ExtNat::Finite(h) => 2 * h <= s(l) + 2,
        ExtNat::Infinity => false,
    }
}

/// `½S(ℓ₁) + ½S(ℓ₂) ≤ ½S(ℓ)` with `ℓ = ℓ₁ + ℓ₂`.
pub fn pair_predicate(l1: u64, l2: u64) -> bool {
    s(l1) + s(l2) <= s(l1 + l2)
}

/// `S(ℓ₁) + S(ℓ₂) - 1 ≤ ½S(2(ℓ₁+ℓ₂))`.
pub fn part_iv_predicate(l1: u64, l2: u64) -> bool {
    2 * (s(l1) + s(l2)) <= s(2 * (l1 + l2)) + 2
}

/// `½(S(ℓ₁) + S(ℓ₂) + S(ℓ₃)) ≤ ½S(ℓ₁+ℓ₂+ℓ₃)`.
pub fn triple_predicate(l1: u64, l2: u64, l3: u64) -> bool {
    s(l1) + s(l2) + s(l3) <= s(l1 + l2 + l3)
}

/// `½S(ℓ₁) + (3/2)S(ℓ₂) ≤ ½S(ℓ₁ + 3ℓ₂)`.
pub fn part_vi_predicate(l1: u64, l2: u64) -> bool {
    s(l1) + 3 * s(l2) <= s(l1 + 3 * l2)
}

/// `½S(ℓ₁) + ½S(ℓ₂) + S(ℓ₃) ≤ ½S(ℓ₁ + ℓ₂ + 2ℓ₃)`.
pub fn part_vii_predicate(l1: u64, l2: u64, l3: u64) -> bool {
    s(l1) + s(l2) + 2 * s(l3) <= s(l1 + l2 + 2 * l3)
}

/// `½ΣS(ℓⱼ) + 1 ≤ ½S(Σℓⱼ)` for four summands.
pub fn part_viii_predicate(ls: [u64; 4]) -> bool {
    ls.iter().map(|&l| s(l)).sum::<u64>() + 2 <= s(ls.iter().sum())
}

fn counter(l: u64, parts: Vec<u64>, detail: impl Into<String>) -> Option<Counterexample> {
    Some(Counterexample { l, parts, detail: detail.into() })
}

fn check_i(l: u64) -> Option<Counterexample> {
    let expected = l >= 4 && is_power_of_two(l);
    let got = part_i_predicate(l);
    (got != expected).then(|| counter(l, vec![], format!("predicate {got}, expected {expected}"))).flatten()
}

fn check_ii(l: u64) -> Option<Counterexample> {
    let expected = s(l) <= 2 && l.is_multiple_of(2);
    let got = part_ii_predicate(l);
    (got != expected).then(|| counter(l, vec![], format!("predicate {got}, expected {expected}"))).flatten()
}

fn check_iii(l: u64) -> Option<Counterexample> {
    let count = (1..l).filter(|&l1| pair_predicate(l1, l - l1)).count() as u64;
    let expected = expected_pair_count(l);
    (count != expected)
        .then(|| counter(l, vec![], format!("{count} pairs, expected {expected}")))
        .flatten()
}

fn check_iv(l: u64) -> Option<Counterexample> {
    if !l.is_multiple_of(2) {
        return None;
    }
    let half = l / 2;
    for l1 in 1..half {
        let l2 = half - l1;
        if l1 == l2 {
            continue;
        }
        let expected = s(l1) == 1 && s(l2) == 1 && s(l) == 2;
        if part_iv_predicate(l1, l2) != expected {
            return counter(l, vec![l1, l2], format!("predicate disagrees with expected {expected}"));
        }
    }
    None
}

fn check_v(l: u64) -> Option<Counterexample> {
    // Not all distinct: some value x repeats; order does not affect the predicate.
    for x in 1..=l / 2 {
        let y = l - 2 * x;
        if y >= 1 && triple_predicate(x, x, y) {
            return counter(l, vec![x, x, y], "predicate holds");
        }
    }
    None
}

fn check_vi(l: u64) -> Option<Counterexample> {
    for l2 in 1..=l / 3 {
        let l1 = l - 3 * l2;
        if l1 >= 1 && l1 != l2 && part_vi_predicate(l1, l2) {
            return counter(l, vec![l1, l2], "predicate holds");
        }
    }
    None
}

/// Minimal doubled left-hand sides over relaxed decompositions (distinctness
/// dropped), computed by min-plus convolution for every `ℓ ≤ l_max`.
struct RelaxedMinima {
    /// `min S(ℓ₁) + S(ℓ₂) + 2S(ℓ₃)`, `ℓⱼ ≥ 1`, `ℓ₁ + ℓ₂ + 2ℓ₃ = ℓ`.
    vii: Vec<Option<u64>>,
    /// `min ΣS(ℓⱼ)`, `ℓⱼ ≥ 0`, four summands.
    viii: Vec<u64>,
}

fn min_plus(a: &[Option<u64>], b: &[Option<u64>], len: usize) -> Vec<Option<u64>> {
    let mut out = vec![None; len];
    for (m, slot) in out.iter_mut().enumerate() {
        for k in 0..=m {
            if let (Some(x), Some(y)) = (a[k], b[m - k]) {
                let v = x + y;
                if slot.is_none_or(|cur| v < cur) {
                    *slot = Some(v);
                }
            }
        }
    }
    out
}

impl RelaxedMinima {
    fn compute(l_max: u64) -> RelaxedMinima {
        let len = l_max as usize + 1;
        let positive: Vec<Option<u64>> =
            (0..len).map(|m| (m >= 1).then(|| s(m as u64))).collect();
        let nonneg: Vec<Option<u64>> = (0..len).map(|m| Some(s(m as u64))).collect();
        let doubled: Vec<Option<u64>> = (0..len)
            .map(|m| (m >= 2 && m % 2 == 0).then(|| 2 * s(m as u64 / 2)))
            .collect();
        let pair_pos = min_plus(&positive, &positive, len);
        let vii = min_plus(&pair_pos, &doubled, len);
        let pair_nn = min_plus(&nonneg, &nonneg, len);
        let viii = min_plus(&pair_nn, &pair_nn, len)
            .into_iter()
            .map(|v| v.expect("every ℓ splits into nonnegative parts"))
            .collect();
        RelaxedMinima { vii, viii }
    }
}

fn check_vii(l: u64, minima: &RelaxedMinima) -> Option<Counterexample> {
    match minima.vii[l as usize] {
        Some(m) if m <= s(l) => {}
        _ => return None,
    }
    // The relaxed bound is inconclusive: enumerate the distinct triples.
    for l3 in 1..=l / 2 {
        let rest = l - 2 * l3;
        for l1 in 1..rest {
            let l2 = rest - l1;
            if l1 != l2 && l1 != l3 && l2 != l3 && part_vii_predicate(l1, l2, l3) {
                return counter(l, vec![l1, l2, l3], "predicate holds");
            }
        }
    }
    None
}

fn check_viii(l: u64, minima: &RelaxedMinima) -> Option<Counterexample> {
    if minima.viii[l as usize] + 2 > s(l) {
        return None;
    }
    for l1 in 0..=l {
        for l2 in (l1 + 1)..=(l - l1) {
            for l3 in (l2 + 1)..=(l - l1 - l2) {
                let l4 = l - l1 - l2 - l3;
                if l4 > l3 && part_viii_predicate([l1, l2, l3, l4]) {
                    return counter(l, vec![l1, l2, l3, l4], "predicate holds");
                }
            }
        }
    }
    None
}

/// Check all eight parts for every `1 ≤ ℓ ≤ l_max`.
///
/// Parts vii and viii first bound the minimum over the relaxed family of
/// decompositions that ignores distinctness; only when that bound fails to
/// exclude the predicate are the distinct decompositions enumerated.
pub fn check_possibilities(l_max: u64) -> PossibilitiesReport {
    let minima = RelaxedMinima::compute(l_max);
    let parts = Part::ALL
        .iter()
        .map(|&part| {
            let counterexample = (1..=l_max).find_map(|l| match part {
                Part::I => check_i(l),
                Part::II => check_ii(l),
                Part::III => check_iii(l),
                Part::IV => check_iv(l),
                Part::V => check_v(l),
                Part::VI => check_vi(l),
                Part::VII => check_vii(l, &minima),
                Part::VIII => check_viii(l, &minima),
            });
            PartResult { part, checked: l_max, counterexample }
        })
        .collect();
    PossibilitiesReport { l_max, parts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spot_values() {
        assert_eq!(digit_sum(Rational64::from_integer(0)), ExtNat::Finite(0));
        assert_eq!(digit_sum(Rational64::from_integer(12)), ExtNat::Finite(2));
        assert_eq!(digit_sum(Rational64::new(3, 2)), ExtNat::Infinity);
        assert_eq!(digit_sum(Rational64::from_integer(-4)), ExtNat::Infinity);
        for k in 0..62 {
            assert_eq!(digit_sum(Rational64::from_integer(1 << k)), ExtNat::Finite(1));
        }
        assert!(ExtNat::Finite(u64::MAX) < ExtNat::Infinity);
    }

    fn brute_pairs(l: u64) -> Vec<(u64, u64)> {
        // independent oracle: digit sums via repeated halving
        fn ds(mut x: u64) -> u64 {
            let mut c = 0;
            while x > 0 {
                c += x % 2;
                x /= 2;
            }
            c
        }
        let mut out = Vec::new();
        for a in 1..l {
            if ds(a) + ds(l - a) == ds(l) {
                out.push((a, l - a));
            }
        }
        out
    }

    #[test]
    fn equality_pair_examples() {
        assert_eq!(equality_pairs(5), vec![(1, 4), (4, 1)]);
        assert_eq!(equality_pairs(5), brute_pairs(5));
        assert!(equality_pairs(4).is_empty());
        assert_eq!(equality_pairs(7).len(), 6);
    }

    #[test]
    fn part_examples() {
        assert!(part_i_predicate(8));
        assert!(!part_i_predicate(12));
        assert_eq!((1..7).filter(|&a| pair_predicate(a, 7 - a)).count(), 6);
        assert!(!triple_predicate(2, 2, 5));
        // all not-all-distinct triples summing to 9
        for a in 1..9u64 {
            for b in 1..9 - a {
                let c = 9 - a - b;
                if a == b || b == c || a == c {
                    assert!(!triple_predicate(a, b, c));
                }
            }
        }
    }

    #[test]
    fn part_vii_and_viii_brute_force_small() {
        // Direct enumeration, independent of the min-plus shortcut.
        for l in 1..=64u64 {
            for l1 in 1..l {
                for l2 in 1..l {
                    for l3 in 1..l {
                        if l1 + l2 + 2 * l3 == l && l1 != l2 && l2 != l3 && l1 != l3 {
                            assert!(!part_vii_predicate(l1, l2, l3));
                        }
                    }
                }
            }
            for l1 in 0..=l {
                for l2 in 0..=l - l1 {
                    for l3 in 0..=l - l1 - l2 {
                        let l4 = l - l1 - l2 - l3;
                        let v = [l1, l2, l3, l4];
                        let distinct = (0..4).all(|i| (i + 1..4).all(|j| v[i] != v[j]));
                        if distinct {
                            assert!(!part_viii_predicate(v));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn possibilities_to_512() {
        let report = check_possibilities(512);
        for p in &report.parts {
            assert!(p.passed(), "{:?}", p);
        }
    }

    #[test]
    fn relaxed_minima_never_reach_the_bound() {
        let m = RelaxedMinima::compute(300);
        for l in 1..=300u64 {
            assert!(m.viii[l as usize] + 2 > s(l));
            if let Some(v) = m.vii[l as usize] {
                assert!(v > s(l));
            }
        }
    }

    proptest! {
        #[test]
        fn subadditive(a in 0u64..1 << 40, b in 0u64..1 << 40) {
            prop_assert!(s(a + b) <= s(a) + s(b));
        }

        #[test]
        fn strict_on_diagonal(a in 1u64..1 << 40) {
            prop_assert!(s(2 * a) < 2 * s(a));
        }

        #[test]
        fn doubling_preserves(a in 0u64..1 << 50) {
            prop_assert_eq!(s(2 * a), s(a));
        }

        #[test]
        fn pair_count_law(l in 1u64..3000) {
            prop_assert_eq!(equality_pairs(l).len() as u64, expected_pair_count(l));
        }
    }
}
