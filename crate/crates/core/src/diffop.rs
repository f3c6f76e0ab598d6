//! Difference operators with polynomial coefficients in normal form.
//!
//! An operator is a finite sum `Σ_k p_k(x) D^k` where `D f(x) = f(x + 1)` and
//! every coefficient sits to the left of its shift. Composition uses the
//! reordering rule `D^k p(x) = p(x + k) D^k`, so the term map is a unique normal
//! form and operator equality is map equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::polyalg::{int, Poly, Rational};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffOp {
    terms: BTreeMap<i64, Poly>,
}

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp::default()
    }

    pub fn identity() -> Self {
        DiffOp::term(0, Poly::one())
    }

    /// `D^k`.
    pub fn shift(k: i64) -> Self {
        DiffOp::term(k, Poly::one())
    }

    /// Multiplication by `p(x)`.
    pub fn mul_poly(p: Poly) -> Self {
        DiffOp::term(0, p)
    }

    pub fn scalar(c: Rational) -> Self {
        DiffOp::term(0, Poly::constant(c))
    }

    /// `p(x) D^k`.
    pub fn term(k: i64, p: Poly) -> Self {
        let mut terms = BTreeMap::new();
        if !p.is_zero() {
            terms.insert(k, p);
        }
        DiffOp { terms }
    }

    /// Collects `(shift, coefficient)` pairs, summing repeated shifts and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (i64, Poly)>>(iter: I) -> Self {
        let mut terms: BTreeMap<i64, Poly> = BTreeMap::new();
        for (k, p) in iter {
            let slot = terms.entry(k).or_default();
            *slot = &*slot + &p;
        }
        terms.retain(|_, p| !p.is_zero());
        DiffOp { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Poly)> {
        self.terms.iter().map(|(k, p)| (*k, p))
    }

    pub fn coeff(&self, k: i64) -> Option<&Poly> {
        self.terms.get(&k)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest and largest shift in the support.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.terms.keys().next()?;
        let hi = *self.terms.keys().next_back()?;
        Some((lo, hi))
    }

    /// Largest coefficient degree, `None` for the zero operator.
    pub fn coeff_degree(&self) -> Option<usize> {
        self.terms.values().filter_map(Poly::degree).max()
    }

    /// `Σ_k p_k(x) f(x + k)`.
    pub fn apply(&self, f: &Poly) -> Poly {
        self.terms
            .iter()
            .fold(Poly::zero(), |acc, (k, p)| &acc + &(p * &f.shift(*k)))
    }

    /// Normal form of `self ∘ other`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut out: BTreeMap<i64, Poly> = BTreeMap::new();
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let prod = a * &b.shift(*i);
                let slot = out.entry(i + j).or_default();
                *slot = &*slot + &prod;
            }
        }
        out.retain(|_, p| !p.is_zero());
        DiffOp { terms: out }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        &self.compose(other) - &other.compose(self)
    }

    /// `ad_self^j (a)` by iterated commutators.
    pub fn ad_power(&self, a: &DiffOp, j: usize) -> DiffOp {
        let mut cur = a.clone();
        for _ in 0..j {
            if cur.is_zero() {
                break;
            }
            cur = self.commutator(&cur);
        }
        cur
    }

    pub fn pow(&self, e: usize) -> DiffOp {
        (0..e).fold(DiffOp::identity(), |acc, _| acc.compose(self))
    }

    pub fn scale(&self, c: &Rational) -> DiffOp {
        DiffOp::from_terms(self.terms.iter().map(|(k, p)| (*k, p.scale(c))))
    }

    /// `Σ_j q_j self^j` for `q = Σ q_j X^j`.
    pub fn poly_in(&self, q: &Poly) -> DiffOp {
        let mut acc = DiffOp::zero();
        let mut power = DiffOp::identity();
        for (j, c) in q.coeffs().iter().enumerate() {
            if j > 0 {
                power = power.compose(self);
            }
            if !c.is_zero() {
                acc = &acc + &power.scale(c);
            }
        }
        acc
    }

    /// Returns `s` with `self = s · other` when such a scalar exists.
    pub fn ratio_to(&self, other: &DiffOp) -> Option<Rational> {
        if other.is_zero() {
            return self.is_zero().then(Rational::zero);
        }
        let (k, p) = other.terms.iter().next()?;
        let lead = p.leading_coeff()?;
        let deg = p.degree()?;
        let s = self.coeff(*k).map(|q| q.coeff(deg)).unwrap_or_else(Rational::zero) / lead;
        (other.scale(&s) == *self).then_some(s)
    }

    /// Equality judged only through the action on `(x)_0, ..., (x)_upto`.
    pub fn agrees_on_falling_basis(&self, other: &DiffOp, upto: usize) -> bool {
        (0..=upto).all(|n| {
            let f = Poly::falling_factorial(n);
            self.apply(&f) == other.apply(&f)
        })
    }
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        DiffOp::from_terms(
            self.terms
                .iter()
                .chain(rhs.terms.iter())
                .map(|(k, p)| (*k, p.clone())),
        )
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        self + &(-rhs)
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp {
            terms: self.terms.iter().map(|(k, p)| (*k, -p)).collect(),
        }
    }
}

impl Mul for &DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        self.compose(rhs)
    }
}

impl Add for DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: DiffOp) -> DiffOp {
        &self + &rhs
    }
}

impl Sub for DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: DiffOp) -> DiffOp {
        &self - &rhs
    }
}

impl Mul for DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: DiffOp) -> DiffOp {
        self.compose(&rhs)
    }
}

impl Neg for DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        -&self
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, p)| match k {
                0 => format!("({p})"),
                1 => format!("({p})·D"),
                _ => format!("({p})·D^{k}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOp[{self}]")
    }
}

/// JSON object `{ "<shift>": [coefficient strings ascending degree], ... }`.
impl Serialize for DiffOp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(self.terms.iter().map(|(k, p)| (k.to_string(), p)))
    }
}

impl<'de> Deserialize<'de> for DiffOp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, Poly> = BTreeMap::deserialize(deserializer)?;
        let terms = raw
            .into_iter()
            .map(|(k, p)| {
                k.parse::<i64>()
                    .map(|k| (k, p))
                    .map_err(|_| serde::de::Error::custom(format!("bad shift key `{k}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DiffOp::from_terms(terms))
    }
}

/// The named operators the engine builds on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpName {
    IdentityOp,
    D,
    Dinv,
    /// `Δ = D − 1`
    Delta,
    /// `∇ = D⁻¹ − 1`
    Nabla,
    MulX,
    /// `L = x∇`
    Lop,
    /// `N = −x∇`, the operator with `N (x)_n = n (x)_n`.
    NumberOp,
    /// `G(β) = Δ ∘ (N + β)`, so that `G (x)_n = n(n + β) (x)_{n−1}`.
    Gop(Rational),
    /// `R(β) = [G(β), x]`.
    Rop(Rational),
}

impl OpName {
    pub fn build(&self) -> DiffOp {
        build(self)
    }
}

pub fn build(name: &OpName) -> DiffOp {
    match name {
        OpName::IdentityOp => DiffOp::identity(),
        OpName::D => DiffOp::shift(1),
        OpName::Dinv => DiffOp::shift(-1),
        OpName::Delta => &DiffOp::shift(1) - &DiffOp::identity(),
        OpName::Nabla => &DiffOp::shift(-1) - &DiffOp::identity(),
        OpName::MulX => DiffOp::mul_poly(Poly::x()),
        OpName::Lop => build(&OpName::MulX).compose(&build(&OpName::Nabla)),
        OpName::NumberOp => -&build(&OpName::Lop),
        OpName::Gop(beta) => {
            let shifted = &build(&OpName::NumberOp) + &DiffOp::scalar(beta.clone());
            build(&OpName::Delta).compose(&shifted)
        }
        OpName::Rop(beta) => build(&OpName::Gop(beta.clone())).commutator(&build(&OpName::MulX)),
    }
}

/// `Δ^m`, handy in identity checks.
pub fn delta_pow(m: usize) -> DiffOp {
    build(&OpName::Delta).pow(m)
}

/// Integer multiple of an operator.
pub fn times(k: i64, a: &DiffOp) -> DiffOp {
    a.scale(&int(k))
}

impl DiffOp {
    /// True when the operator is a scalar multiple of the identity.
    pub fn as_scalar(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        let p = self.coeff(0)?;
        (p.degree() == Some(0)).then(|| p.coeff(0))
    }

    pub fn is_identity(&self) -> bool {
        self.as_scalar().is_some_and(|s| s.is_one())
    }
}
