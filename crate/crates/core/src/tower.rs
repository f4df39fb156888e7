//! Exact arithmetic in towers of quadratic extensions of `Q`, valued at a
//! fixed place above 2.
//!
//! A tower with `k` layers has basis `{ g^S : S ⊆ {1..k} }`; coordinate index
//! bit `j` stands for the generator `g_{j+1}`, so the top generator splits an
//! element into halves `x = x0 + x1·g_k` with `x0, x1` in the tower below.
//! Each generator squares to an integral element of the tower below it.
//!
//! Valuations are normalized by `v(2) = 1`. A layer is one of
//!
//! * ramified or unramified: the radicand is not a square in the completion,
//!   so there is one place above the place below and `v(x) = v(N(x))/2`;
//! * split: the radicand is a 2-adic square without a global root. The place
//!   is fixed by a stored approximation `ρ̃` of the chosen 2-adic root `ρ`,
//!   with `v(ρ̃² - r) > v(r) + 2`.
//!
//! Every tower also carries a uniformizer and residue representatives for its
//! completion, which drive the square test.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::valuation::Valuation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TowerError {
    #[error("elements belong to different towers")]
    TowerMismatch,
    #[error("square root of zero requested")]
    ZeroArgument,
    #[error("radicand is already a square at the chosen place")]
    AlreadySquare,
    #[error("radicand is not a square at the chosen place")]
    NotLocalSquare,
    #[error("division by zero")]
    DivisionByZero,
    #[error("target tower does not extend the element's tower")]
    NotAnExtension,
}

/// How a layer sits over the tower below it, at the chosen place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LayerKind {
    Ramified,
    Unramified,
    Split,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Elem {
    num: Vec<BigInt>,
    den: BigInt,
}

#[derive(Clone, Debug)]
struct Layer {
    radicand: Vec<BigInt>,
    radicand_val: Rational64,
    kind: LayerKind,
    approx: Option<Elem>,
}

static NEXT_TOWER_ID: AtomicU64 = AtomicU64::new(0);

pub struct FieldTower {
    lineage: Vec<u64>,
    layers: Vec<Layer>,
    ram_index: i64,
    residue_degree: u32,
    uniformizer: Elem,
    uniformizer_inv: Elem,
    residue_reps: Vec<Elem>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldTower")
            .field("id", &self.id())
            .field("degree", &self.degree())
            .field("ramification_index", &self.ram_index)
            .field("residue_degree", &self.residue_degree)
            .field("layers", &self.layer_kinds())
            .finish()
    }
}

/// Result of [`TowerElement::try_sqrt`].
#[derive(Clone, Debug)]
pub enum SqrtOutcome {
    /// A square root exists in the tower itself.
    InTower(TowerElement),
    /// The element is a square in the completion but has no root in the tower;
    /// see [`FieldTower::adjoin_local_root`].
    LocalSquare,
    /// Not a square in the completion; [`FieldTower::adjoin_sqrt`] applies.
    NeedsExtension,
}

/// A freshly built tower together with the adjoined square root.
#[derive(Clone, Debug)]
pub struct Extension {
    pub tower: Arc<FieldTower>,
    pub root: TowerElement,
}

#[derive(Clone)]
pub struct TowerElement {
    tower: Arc<FieldTower>,
    c: Elem,
}

/// Coordinate dump used by witness output.
#[derive(Clone, Debug, Serialize)]
pub struct ElementDump {
    pub coords: Vec<String>,
    pub radicands: Vec<Vec<String>>,
}

// ---------------------------------------------------------------------------
// Integer coordinate vectors

fn is_zero_vec(x: &[BigInt]) -> bool {
    x.iter().all(Zero::is_zero)
}

fn add_vec(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

fn sub_vec(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn scale_vec(x: &[BigInt], k: &BigInt) -> Vec<BigInt> {
    x.iter().map(|a| a * k).collect()
}

fn v2(x: &BigInt) -> i64 {
    x.trailing_zeros().expect("v2 of zero") as i64
}

fn mul_raw(layers: &[Layer], x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    let k = layers.len();
    if k == 0 {
        return vec![&x[0] * &y[0]];
    }
    let h = x.len() / 2;
    let (x0, x1) = x.split_at(h);
    let (y0, y1) = y.split_at(h);
    let lower = &layers[..k - 1];
    let x1z = is_zero_vec(x1);
    let y1z = is_zero_vec(y1);
    let mut out = Vec::with_capacity(x.len());
    if x1z && y1z {
        out.extend(mul_raw(lower, x0, y0));
        out.extend(std::iter::repeat_n(BigInt::zero(), h));
    } else if x1z {
        out.extend(mul_raw(lower, x0, y0));
        out.extend(mul_raw(lower, x0, y1));
    } else if y1z {
        out.extend(mul_raw(lower, x0, y0));
        out.extend(mul_raw(lower, x1, y0));
    } else {
        let p0 = mul_raw(lower, x0, y0);
        let p1 = mul_raw(lower, x1, y1);
        let pm = mul_raw(lower, &add_vec(x0, x1), &add_vec(y0, y1));
        let rp1 = mul_raw(lower, &layers[k - 1].radicand, &p1);
        let z1 = sub_vec(&sub_vec(&pm, &p0), &p1);
        out.extend(add_vec(&p0, &rp1));
        out.extend(z1);
    }
    out
}

/// `x0² - r·x1²` in the tower below the top layer.
fn norm_down(layers: &[Layer], x0: &[BigInt], x1: &[BigInt]) -> Vec<BigInt> {
    let k = layers.len();
    let lower = &layers[..k - 1];
    let sq0 = mul_raw(lower, x0, x0);
    let sq1 = mul_raw(lower, x1, x1);
    sub_vec(&sq0, &mul_raw(lower, &layers[k - 1].radicand, &sq1))
}

fn val_raw(layers: &[Layer], x: &[BigInt]) -> Option<Rational64> {
    let k = layers.len();
    if k == 0 {
        return x[0].trailing_zeros().map(|t| Rational64::from_integer(t as i64));
    }
    let h = x.len() / 2;
    let (x0, x1) = x.split_at(h);
    let lower = &layers[..k - 1];
    let layer = &layers[k - 1];
    if is_zero_vec(x1) {
        return val_raw(lower, x0);
    }
    let v1 = val_raw(lower, x1).expect("nonzero half");
    if is_zero_vec(x0) {
        return Some(v1 + layer.radicand_val / 2);
    }
    let s = val_raw(lower, &norm_down(layers, x0, x1)).expect("norm of a nonzero element");
    match layer.kind {
        LayerKind::Ramified | LayerKind::Unramified => Some(s / 2),
        LayerKind::Split => {
            let gap = Rational64::one() + v1 + layer.radicand_val / 2;
            if s <= gap * 2 {
                return Some(s / 2);
            }
            let approx = layer.approx.as_ref().expect("split layer approximation");
            let near = add_vec(&scale_vec(x0, &approx.den), &mul_raw(lower, x1, &approx.num));
            let t = val_raw(lower, &near).map(|t| t - Rational64::from_integer(v2(&approx.den)));
            match t {
                Some(t) if t <= gap => Some(gap),
                _ => Some(s - gap),
            }
        }
    }
}

fn inv_raw(layers: &[Layer], x: &[BigInt]) -> (Vec<BigInt>, BigInt) {
    let k = layers.len();
    if k == 0 {
        let sign = if x[0].is_negative() { -BigInt::one() } else { BigInt::one() };
        return (vec![sign], x[0].abs());
    }
    let h = x.len() / 2;
    let (x0, x1) = x.split_at(h);
    let lower = &layers[..k - 1];
    if is_zero_vec(x1) {
        let (mut n, d) = inv_raw(lower, x0);
        n.extend(std::iter::repeat_n(BigInt::zero(), h));
        return (n, d);
    }
    let norm = norm_down(layers, x0, x1);
    let (ni, d) = inv_raw(lower, &norm);
    let mut out = mul_raw(lower, x0, &ni);
    out.extend(mul_raw(lower, x1, &ni).into_iter().map(|c| -c));
    (out, d)
}

// ---------------------------------------------------------------------------
// Rational elements (common denominator)

/// Running sum of unreduced fractions.
struct Accumulator {
    num: Vec<BigInt>,
    den: BigInt,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Accumulator { num: vec![BigInt::zero(); len], den: BigInt::one() }
    }

    fn push(&mut self, p: Vec<BigInt>, pd: BigInt) {
        if pd == self.den {
            self.num = add_vec(&self.num, &p);
            return;
        }
        let g = self.den.gcd(&pd);
        let fa = &pd / &g;
        let fb = &self.den / &g;
        self.num = add_vec(&scale_vec(&self.num, &fa), &scale_vec(&p, &fb));
        self.den *= fa;
    }

    fn finish(self) -> Elem {
        Elem::new(self.num, self.den)
    }
}

impl Elem {
    fn new(num: Vec<BigInt>, den: BigInt) -> Elem {
        assert!(!den.is_zero(), "zero denominator");
        if is_zero_vec(&num) {
            let len = num.len();
            return Elem { num: vec![BigInt::zero(); len], den: BigInt::one() };
        }
        let mut g = den.abs();
        for c in &num {
            if g.is_one() {
                break;
            }
            if !c.is_zero() {
                g = g.gcd(c);
            }
        }
        let neg = den.is_negative();
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.iter().map(|c| c / &g).collect(), &den / &g)
        };
        if neg {
            Elem { num: num.into_iter().map(|c| -c).collect(), den: -den }
        } else {
            Elem { num, den }
        }
    }

    fn zero(len: usize) -> Elem {
        Elem { num: vec![BigInt::zero(); len], den: BigInt::one() }
    }

    fn from_ratio(len: usize, r: &BigRational) -> Elem {
        let mut num = vec![BigInt::zero(); len];
        num[0] = r.numer().clone();
        Elem::new(num, r.denom().clone())
    }

    fn from_int(len: usize, v: i64) -> Elem {
        let mut num = vec![BigInt::zero(); len];
        num[0] = BigInt::from(v);
        Elem { num, den: BigInt::one() }
    }

    fn is_zero(&self) -> bool {
        is_zero_vec(&self.num)
    }

    fn padded(&self, len: usize) -> Elem {
        let mut num = self.num.clone();
        num.resize(len, BigInt::zero());
        Elem { num, den: self.den.clone() }
    }

    fn halves(&self) -> (Elem, Elem) {
        let h = self.num.len() / 2;
        (
            Elem::new(self.num[..h].to_vec(), self.den.clone()),
            Elem::new(self.num[h..].to_vec(), self.den.clone()),
        )
    }

    fn join(x0: &Elem, x1: &Elem) -> Elem {
        let g = x0.den.gcd(&x1.den);
        let f0 = &x1.den / &g;
        let f1 = &x0.den / &g;
        let mut num = scale_vec(&x0.num, &f0);
        num.extend(scale_vec(&x1.num, &f1));
        Elem::new(num, &x0.den * f0)
    }

    fn add(&self, o: &Elem) -> Elem {
        if self.den == o.den {
            return Elem::new(add_vec(&self.num, &o.num), self.den.clone());
        }
        let g = self.den.gcd(&o.den);
        let fa = &o.den / &g;
        let fb = &self.den / &g;
        let num = add_vec(&scale_vec(&self.num, &fa), &scale_vec(&o.num, &fb));
        Elem::new(num, &self.den * fa)
    }

    fn neg(&self) -> Elem {
        Elem { num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }

    fn sub(&self, o: &Elem) -> Elem {
        self.add(&o.neg())
    }

    fn scale(&self, r: &BigRational) -> Elem {
        Elem::new(scale_vec(&self.num, r.numer()), &self.den * r.denom())
    }

    fn mul(&self, o: &Elem, layers: &[Layer]) -> Elem {
        Elem::new(mul_raw(layers, &self.num, &o.num), &self.den * &o.den)
    }

    /// `Σ xᵢyᵢ`, reduced once at the end.
    fn dot<'a>(len: usize, pairs: impl Iterator<Item = (&'a Elem, &'a Elem)>, layers: &[Layer]) -> Elem {
        let mut acc = Accumulator::new(len);
        for (x, y) in pairs {
            if !x.is_zero() && !y.is_zero() {
                acc.push(mul_raw(layers, &x.num, &y.num), &x.den * &y.den);
            }
        }
        acc.finish()
    }

    fn inv(&self, layers: &[Layer]) -> Option<Elem> {
        if self.is_zero() {
            return None;
        }
        let (n, d) = inv_raw(layers, &self.num);
        Some(Elem::new(scale_vec(&n, &self.den), d))
    }

    fn val(&self, layers: &[Layer]) -> Valuation {
        match val_raw(layers, &self.num) {
            Some(v) => Valuation::Finite(v - Rational64::from_integer(v2(&self.den))),
            None => Valuation::Infinite,
        }
    }

    fn pow(&self, mut e: u64, layers: &[Layer]) -> Elem {
        let mut base = self.clone();
        let mut acc = Elem::from_int(self.num.len(), 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, layers);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, layers);
            }
        }
        acc
    }
}

fn rational_sqrt(num: &BigInt, den: &BigInt) -> Option<Elem> {
    if num.is_negative() {
        return None;
    }
    let prod = num * den;
    let s = prod.sqrt();
    if &s * &s == prod {
        Some(Elem::new(vec![s], den.clone()))
    } else {
        None
    }
}

/// Square root inside the global tower, if one exists.
fn exact_sqrt(layers: &[Layer], x: &Elem) -> Option<Elem> {
    let k = layers.len();
    if k == 0 {
        return rational_sqrt(&x.num[0], &x.den);
    }
    if x.is_zero() {
        return Some(x.clone());
    }
    let lower = &layers[..k - 1];
    let len = x.num.len() / 2;
    let (x0, x1) = x.halves();
    let radicand = Elem { num: layers[k - 1].radicand.clone(), den: BigInt::one() };
    if x1.is_zero() {
        if let Some(y0) = exact_sqrt(lower, &x0) {
            return Some(Elem::join(&y0, &Elem::zero(len)));
        }
        let quotient = x0.mul(&radicand.inv(lower)?, lower);
        let y1 = exact_sqrt(lower, &quotient)?;
        return Some(Elem::join(&Elem::zero(len), &y1));
    }
    let norm = x0.mul(&x0, lower).sub(&radicand.mul(&x1.mul(&x1, lower), lower));
    let n0 = exact_sqrt(lower, &norm)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for cand in [x0.add(&n0), x0.sub(&n0)] {
        let c = cand.scale(&half);
        if let Some(y0) = exact_sqrt(lower, &c) {
            if y0.is_zero() {
                continue;
            }
            let y1 = x1.mul(&y0.inv(lower)?, lower).scale(&half);
            return Some(Elem::join(&y0, &y1));
        }
    }
    None
}

/// Square class of a nonzero element in the completion.
enum LocalClass {
    OddValuation { k: i64 },
    /// `approx` satisfies `v(approx² - x) > v(x) + 2`.
    Square { approx: Elem },
    /// `x = π^{2m}·u` with `v(u - y²) = 2` exactly and no better lift.
    Unramified { m: i64, y: Elem },
    /// `x = π^{2m}·u` with `e·v(u - y²) = j` odd and `j < 2e`.
    Ramified { m: i64, y: Elem, j: i64 },
}

// ---------------------------------------------------------------------------
// Towers

impl FieldTower {
    /// The rational numbers, valued 2-adically.
    pub fn rationals() -> Arc<FieldTower> {
        let id = NEXT_TOWER_ID.fetch_add(1, Ordering::Relaxed);
        Arc::new(FieldTower {
            lineage: vec![id],
            layers: Vec::new(),
            ram_index: 1,
            residue_degree: 1,
            uniformizer: Elem::from_int(1, 2),
            uniformizer_inv: Elem::new(vec![BigInt::one()], BigInt::from(2)),
            residue_reps: vec![Elem::from_int(1, 0), Elem::from_int(1, 1)],
        })
    }

    pub fn id(&self) -> u64 {
        *self.lineage.last().expect("lineage is never empty")
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn degree(&self) -> usize {
        1 << self.layers.len()
    }

    /// Ramification index `e` of the completion over `Q_2`; valuations lie in `(1/e)Z`.
    pub fn ramification_index(&self) -> i64 {
        self.ram_index
    }

    pub fn residue_degree(&self) -> u32 {
        self.residue_degree
    }

    /// Smallest positive valuation, `1/e`.
    pub fn value_group_step(&self) -> Rational64 {
        Rational64::new(1, self.ram_index)
    }

    pub fn layer_kinds(&self) -> Vec<LayerKind> {
        self.layers.iter().map(|l| l.kind).collect()
    }

    /// True when `self` is `other` or was built from it by adjoining layers.
    pub fn extends(&self, other: &FieldTower) -> bool {
        self.lineage.get(other.layers.len()) == Some(&other.id())
    }

    /// The `k`-th generator (0-based), squaring to the stored integral radicand.
    pub fn generator(self: &Arc<Self>, k: usize) -> TowerElement {
        assert!(k < self.layers.len(), "no generator {k}");
        let mut num = vec![BigInt::zero(); self.degree()];
        num[1 << k] = BigInt::one();
        self.wrap(Elem { num, den: BigInt::one() })
    }

    /// The integral radicand of generator `k`, as an element of this tower.
    pub fn radicand(self: &Arc<Self>, k: usize) -> TowerElement {
        let r = Elem { num: self.layers[k].radicand.clone(), den: BigInt::one() };
        self.wrap(r.padded(self.degree()))
    }

    pub fn uniformizer(self: &Arc<Self>) -> TowerElement {
        self.wrap(self.uniformizer.clone())
    }

    pub fn residue_representatives(self: &Arc<Self>) -> Vec<TowerElement> {
        self.residue_reps.iter().map(|r| self.wrap(r.clone())).collect()
    }

    fn wrap(self: &Arc<Self>, c: Elem) -> TowerElement {
        debug_assert_eq!(c.num.len(), self.degree());
        TowerElement { tower: Arc::clone(self), c }
    }

    fn pi_pow(&self, k: i64) -> Elem {
        if k >= 0 {
            self.uniformizer.pow(k as u64, &self.layers)
        } else {
            self.uniformizer_inv.pow((-k) as u64, &self.layers)
        }
    }

    fn e_val(&self, x: &Elem) -> Valuation {
        x.val(&self.layers)
    }

    fn scaled_val(&self, x: &Elem) -> Option<i64> {
        self.e_val(x).finite().map(|v| {
            let s = v * self.ram_index;
            assert!(s.is_integer(), "valuation {v} outside the value group");
            s.to_integer()
        })
    }

    fn residue_sqrt(&self, w: &Elem) -> Elem {
        self.residue_reps
            .iter()
            .find(|c| {
                let d = w.sub(&c.mul(c, &self.layers));
                self.e_val(&d) > Valuation::int(0)
            })
            .cloned()
            .expect("residue field is perfect")
    }

    fn local_class(&self, x: &Elem) -> LocalClass {
        let layers = &self.layers;
        let e = self.ram_index;
        let k = self.scaled_val(x).expect("nonzero element");
        if k.rem_euclid(2) == 1 {
            return LocalClass::OddValuation { k };
        }
        let m = k / 2;
        let u = x.mul(&self.pi_pow(-k), layers);
        let mut y = self.residue_sqrt(&u);
        loop {
            let diff = u.sub(&y.mul(&y, layers));
            let j = self.scaled_val(&diff).unwrap_or(i64::MAX);
            if j > 2 * e {
                return LocalClass::Square { approx: y.mul(&self.pi_pow(m), layers) };
            }
            if j == 2 * e {
                let two = BigRational::from_integer(BigInt::from(2));
                for z in &self.residue_reps {
                    let lifted = y.add(&z.scale(&two));
                    let d = u.sub(&lifted.mul(&lifted, layers));
                    if self.e_val(&d).exceeds(Rational64::from_integer(2)) {
                        return LocalClass::Square { approx: lifted.mul(&self.pi_pow(m), layers) };
                    }
                }
                return LocalClass::Unramified { m, y };
            }
            if j % 2 != 0 {
                return LocalClass::Ramified { m, y, j };
            }
            let w = diff.mul(&self.pi_pow(-j), layers);
            let c = self.residue_sqrt(&w);
            y = y.add(&c.mul(&self.pi_pow(j / 2), layers));
        }
    }

    fn check_member(&self, x: &TowerElement) -> Result<(), TowerError> {
        if x.tower.id() == self.id() {
            Ok(())
        } else {
            Err(TowerError::TowerMismatch)
        }
    }

    /// Adjoin `√x` where `x` is not a square in the completion.
    pub fn adjoin_sqrt(self: &Arc<Self>, x: &TowerElement) -> Result<Extension, TowerError> {
        self.check_member(x)?;
        match x.try_sqrt()? {
            SqrtOutcome::NeedsExtension => Ok(self.extend(x)),
            SqrtOutcome::InTower(_) | SqrtOutcome::LocalSquare => Err(TowerError::AlreadySquare),
        }
    }

    /// Adjoin a root of `x` where `x` is a 2-adic square with no root in the
    /// tower. The new layer is split above 2; the place is fixed by the
    /// 2-adic root that the returned `root` maps to.
    pub fn adjoin_local_root(self: &Arc<Self>, x: &TowerElement) -> Result<Extension, TowerError> {
        self.check_member(x)?;
        match x.try_sqrt()? {
            SqrtOutcome::LocalSquare => Ok(self.extend(x)),
            SqrtOutcome::InTower(_) => Err(TowerError::AlreadySquare),
            SqrtOutcome::NeedsExtension => Err(TowerError::NotLocalSquare),
        }
    }

    fn extend(self: &Arc<Self>, x: &TowerElement) -> Extension {
        let len = self.degree();
        let radicand = scale_vec(&x.c.num, &x.c.den);
        let r_elem = Elem { num: radicand.clone(), den: BigInt::one() };
        let class = self.local_class(&r_elem);
        let radicand_val = self.e_val(&r_elem).finite().expect("nonzero radicand");
        let (kind, approx) = match &class {
            LocalClass::Square { approx } => (LayerKind::Split, Some(approx.clone())),
            LocalClass::Unramified { .. } => (LayerKind::Unramified, None),
            LocalClass::OddValuation { .. } | LocalClass::Ramified { .. } => (LayerKind::Ramified, None),
        };
        let mut layers = self.layers.clone();
        layers.push(Layer { radicand, radicand_val, kind, approx });
        let new_len = 2 * len;
        let lift = |c: &Elem| c.padded(new_len);
        let mut g_num = vec![BigInt::zero(); new_len];
        g_num[len] = BigInt::one();
        let g = Elem { num: g_num, den: BigInt::one() };
        let pi = lift(&self.uniformizer);
        let pi_inv = lift(&self.uniformizer_inv);
        let pi_pow = |k: i64| -> Elem {
            if k >= 0 {
                pi.pow(k as u64, &layers)
            } else {
                pi_inv.pow((-k) as u64, &layers)
            }
        };
        let reps: Vec<Elem> = self.residue_reps.iter().map(lift).collect();
        let (ram_index, residue_degree, uniformizer, residue_reps) = match class {
            LocalClass::Square { .. } => (self.ram_index, self.residue_degree, pi.clone(), reps),
            LocalClass::OddValuation { k } => {
                let u = g.mul(&pi_pow(-(k - 1) / 2), &layers);
                (2 * self.ram_index, self.residue_degree, u, reps)
            }
            LocalClass::Ramified { m, y, j } => {
                let shifted = g.mul(&pi_pow(-m), &layers).sub(&lift(&y));
                let u = shifted.mul(&pi_pow(-(j - 1) / 2), &layers);
                (2 * self.ram_index, self.residue_degree, u, reps)
            }
            LocalClass::Unramified { m, y } => {
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                let z = g.mul(&pi_pow(-m), &layers).sub(&lift(&y)).scale(&half);
                let mut new_reps = Vec::with_capacity(reps.len() * reps.len());
                for r2 in &reps {
                    for r1 in &reps {
                        new_reps.push(r1.add(&r2.mul(&z, &layers)));
                    }
                }
                (self.ram_index, 2 * self.residue_degree, pi.clone(), new_reps)
            }
        };
        let uniformizer_inv = uniformizer.inv(&layers).expect("uniformizer is nonzero");
        let mut lineage = self.lineage.clone();
        lineage.push(NEXT_TOWER_ID.fetch_add(1, Ordering::Relaxed));
        let tower = Arc::new(FieldTower {
            lineage,
            layers,
            ram_index,
            residue_degree,
            uniformizer,
            uniformizer_inv,
            residue_reps,
        });
        debug_assert_eq!(
            tower.e_val(&tower.uniformizer),
            Valuation::Finite(Rational64::new(1, tower.ram_index))
        );
        let root = Elem::new(g.num, x.c.den.clone());
        let root = tower.wrap(root);
        Extension { tower, root }
    }
}

// ---------------------------------------------------------------------------
// Elements

impl TowerElement {
    pub fn zero(tower: &Arc<FieldTower>) -> Self {
        tower.wrap(Elem::zero(tower.degree()))
    }

    pub fn one(tower: &Arc<FieldTower>) -> Self {
        Self::from_int(tower, 1)
    }

    pub fn from_int(tower: &Arc<FieldTower>, v: i64) -> Self {
        tower.wrap(Elem::from_int(tower.degree(), v))
    }

    pub fn from_bigint(tower: &Arc<FieldTower>, v: BigInt) -> Self {
        Self::from_ratio(tower, &BigRational::from_integer(v))
    }

    pub fn from_frac(tower: &Arc<FieldTower>, num: i64, den: i64) -> Self {
        Self::from_ratio(tower, &BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(tower: &Arc<FieldTower>, r: &BigRational) -> Self {
        tower.wrap(Elem::from_ratio(tower.degree(), r))
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.c.den.is_one() && self.c.num[0].is_one() && is_zero_vec(&self.c.num[1..])
    }

    /// Coordinates over the basis of generator products.
    pub fn coords(&self) -> Vec<BigRational> {
        self.c
            .num
            .iter()
            .map(|n| BigRational::new(n.clone(), self.c.den.clone()))
            .collect()
    }

    /// The rational value, if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if is_zero_vec(&self.c.num[1..]) {
            Some(BigRational::new(self.c.num[0].clone(), self.c.den.clone()))
        } else {
            None
        }
    }

    pub fn same_tower(&self, other: &TowerElement) -> Result<(), TowerError> {
        if self.tower.id() == other.tower.id() {
            Ok(())
        } else {
            Err(TowerError::TowerMismatch)
        }
    }

    pub fn checked_add(&self, other: &TowerElement) -> Result<TowerElement, TowerError> {
        self.same_tower(other)?;
        Ok(self.tower.wrap(self.c.add(&other.c)))
    }

    pub fn checked_sub(&self, other: &TowerElement) -> Result<TowerElement, TowerError> {
        self.same_tower(other)?;
        Ok(self.tower.wrap(self.c.sub(&other.c)))
    }

    pub fn checked_mul(&self, other: &TowerElement) -> Result<TowerElement, TowerError> {
        self.same_tower(other)?;
        Ok(self.tower.wrap(self.c.mul(&other.c, &self.tower.layers)))
    }

    /// `Σ xᵢyᵢ` over pairs from this element's tower.
    pub fn dot<'a>(
        tower: &Arc<FieldTower>,
        pairs: impl IntoIterator<Item = (&'a TowerElement, &'a TowerElement)>,
    ) -> Result<TowerElement, TowerError> {
        let mut items = Vec::new();
        for (x, y) in pairs {
            if x.tower.id() != tower.id() || y.tower.id() != tower.id() {
                return Err(TowerError::TowerMismatch);
            }
            items.push((&x.c, &y.c));
        }
        Ok(tower.wrap(Elem::dot(tower.degree(), items.into_iter(), &tower.layers)))
    }

    /// `Σ cₖ·Πxₖⱼ`; each term is a rational coefficient and a list of factors.
    pub fn linear_combination<'a>(
        tower: &Arc<FieldTower>,
        terms: impl IntoIterator<Item = (BigRational, Vec<&'a TowerElement>)>,
    ) -> Result<TowerElement, TowerError> {
        let mut acc = Accumulator::new(tower.degree());
        for (c, factors) in terms {
            if c.is_zero() || factors.iter().any(|f| f.is_zero()) {
                continue;
            }
            let mut num = scale_vec(&Elem::from_int(tower.degree(), 1).num, c.numer());
            let mut den = c.denom().clone();
            for f in factors {
                if f.tower.id() != tower.id() {
                    return Err(TowerError::TowerMismatch);
                }
                num = mul_raw(&tower.layers, &num, &f.c.num);
                den *= &f.c.den;
            }
            acc.push(num, den);
        }
        Ok(tower.wrap(acc.finish()))
    }

    pub fn checked_div(&self, other: &TowerElement) -> Result<TowerElement, TowerError> {
        self.same_tower(other)?;
        self.checked_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<TowerElement, TowerError> {
        self.c
            .inv(&self.tower.layers)
            .map(|c| self.tower.wrap(c))
            .ok_or(TowerError::DivisionByZero)
    }

    pub fn scale(&self, r: &BigRational) -> TowerElement {
        self.tower.wrap(self.c.scale(r))
    }

    pub fn scale_int(&self, k: i64) -> TowerElement {
        self.scale(&BigRational::from_integer(BigInt::from(k)))
    }

    pub fn square(&self) -> TowerElement {
        self.tower.wrap(self.c.mul(&self.c, &self.tower.layers))
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<TowerElement, TowerError> {
        if e >= 0 {
            Ok(self.tower.wrap(self.c.pow(e as u64, &self.tower.layers)))
        } else {
            let inv = self.inv()?;
            Ok(inv.tower.wrap(inv.c.pow(e.unsigned_abs(), &self.tower.layers)))
        }
    }

    /// Exact valuation at the tower's place, normalized by `v(2) = 1`.
    pub fn val(&self) -> Valuation {
        self.c.val(&self.tower.layers)
    }

    /// Norm down to `Q` (product over all embeddings).
    pub fn norm_to_rationals(&self) -> BigRational {
        fn go(layers: &[Layer], x: &Elem) -> Elem {
            let k = layers.len();
            if k == 0 {
                return x.clone();
            }
            let (x0, x1) = x.halves();
            let lower = &layers[..k - 1];
            let r = Elem { num: layers[k - 1].radicand.clone(), den: BigInt::one() };
            let n = x0.mul(&x0, lower).sub(&r.mul(&x1.mul(&x1, lower), lower));
            go(lower, &n)
        }
        let n = go(&self.tower.layers, &self.c);
        BigRational::new(n.num[0].clone(), n.den)
    }

    /// Decide whether `self` has a square root, in the tower or 2-adically.
    pub fn try_sqrt(&self) -> Result<SqrtOutcome, TowerError> {
        if self.is_zero() {
            return Err(TowerError::ZeroArgument);
        }
        match self.tower.local_class(&self.c) {
            LocalClass::Square { .. } => match exact_sqrt(&self.tower.layers, &self.c) {
                Some(r) => Ok(SqrtOutcome::InTower(self.tower.wrap(r))),
                None => Ok(SqrtOutcome::LocalSquare),
            },
            _ => Ok(SqrtOutcome::NeedsExtension),
        }
    }

    /// Re-express `self` in a tower built on top of its own.
    pub fn embed(&self, target: &Arc<FieldTower>) -> Result<TowerElement, TowerError> {
        if !target.extends(&self.tower) {
            return Err(TowerError::NotAnExtension);
        }
        Ok(target.wrap(self.c.padded(target.degree())))
    }

    pub fn dump(&self) -> ElementDump {
        ElementDump {
            coords: self.coords().iter().map(|c| c.to_string()).collect(),
            radicands: self
                .tower
                .layers
                .iter()
                .map(|l| l.radicand.iter().map(|c| c.to_string()).collect())
                .collect(),
        }
    }

    /// Bits in the largest coordinate numerator or the denominator.
    pub fn height_bits(&self) -> u64 {
        self.c.num.iter().map(|n| n.bits()).max().unwrap_or(0).max(self.c.den.bits())
    }
}

/// `v(x - y) >= threshold`. A congruence mod `2^m` is threshold `m`.
pub fn congruent(x: &TowerElement, y: &TowerElement, threshold: Rational64) -> Result<bool, TowerError> {
    Ok(x.checked_sub(y)?.val().at_least(threshold))
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (idx, c) in self.coords().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if idx == 0 {
                write!(f, "{c}")?;
            } else {
                let gens: Vec<String> = (0..usize::BITS as usize)
                    .filter(|b| idx >> b & 1 == 1)
                    .map(|b| format!("g{}", b + 1))
                    .collect();
                write!(f, "({c})*{}", gens.join("*"))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl PartialEq for TowerElement {
    fn eq(&self, other: &Self) -> bool {
        self.tower.id() == other.tower.id() && self.c == other.c
    }
}

impl Eq for TowerElement {}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> std::ops::$tr<&'a TowerElement> for &'a TowerElement {
            type Output = TowerElement;

            fn $method(self, rhs: &'a TowerElement) -> TowerElement {
                self.$checked(rhs).expect("operands from different towers")
            }
        }

        impl std::ops::$tr<TowerElement> for TowerElement {
            type Output = TowerElement;

            fn $method(self, rhs: TowerElement) -> TowerElement {
                self.$checked(&rhs).expect("operands from different towers")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &TowerElement {
    type Output = TowerElement;

    fn neg(self) -> TowerElement {
        self.tower.wrap(self.c.neg())
    }
}

impl std::ops::Neg for TowerElement {
    type Output = TowerElement;

    fn neg(self) -> TowerElement {
        -&self
    }
}

/// `Q(i)` with its generator `i`.
pub fn gaussian_tower() -> (Arc<FieldTower>, TowerElement) {
    let q = FieldTower::rationals();
    let minus_one = TowerElement::from_int(&q, -1);
    let ext = q.adjoin_sqrt(&minus_one).expect("-1 is not a 2-adic square");
    (ext.tower, ext.root)
}
