//! Locally nilpotent automorphisms `σ = e^{ad_P}` and the exponential `e^P` on polynomials.
//!
//! The series `Σ ad_P^j(A)/j!` and `Σ P^j f/j!` are summed exactly until they
//! terminate. Closed-form images for the Charlier (`P(Δ)`) and Meixner (`P(G)`)
//! settings are provided separately so the two routes can be compared.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::diffop::{build, DiffOp, OpName};
use crate::polyalg::{int, Poly, Rational};

/// Default bound on the number of commutators taken by [`exp_ad`].
pub const DEFAULT_MAX_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomError {
    #[error("ad_P is not nilpotent on the operator within {max_order} steps")]
    NotNilpotent { max_order: usize },
    #[error("P does not lower degree: iterate {iteration} has degree {degree:?} (previous {previous:?})")]
    NotLowering {
        iteration: usize,
        degree: Option<usize>,
        previous: Option<usize>,
    },
    #[error("exp(P) did not terminate within {guard} iterations")]
    GuardExceeded { guard: usize },
    #[error("invalid modifier polynomial: {0}")]
    InvalidModifier(String),
}

/// `P(X) = Σ_{j=1}^{d} β_j X^j` with `β_d ≠ 0`; the constant term is absent by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModifierPoly {
    /// `coeffs[j - 1] = β_j`
    coeffs: Vec<Rational>,
}

impl ModifierPoly {
    /// Takes `β_1, ..., β_d`. Trailing zeros are dropped; an all-zero list is rejected.
    pub fn new(mut coeffs: Vec<Rational>) -> Result<Self, AutomError> {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(AutomError::InvalidModifier(
                "P must have degree at least 1".into(),
            ));
        }
        Ok(ModifierPoly { coeffs })
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self, AutomError> {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `β_j` (1-based); zero outside `1..=d`.
    pub fn coeff(&self, j: usize) -> Rational {
        if j == 0 {
            return Rational::zero();
        }
        self.coeffs.get(j - 1).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn as_poly(&self) -> Poly {
        let mut c = vec![Rational::zero()];
        c.extend(self.coeffs.iter().cloned());
        Poly::from_coeffs(c)
    }

    /// `P'(X)` as an ordinary polynomial.
    pub fn derivative(&self) -> Poly {
        derivative(&self.as_poly())
    }

    pub fn second_derivative(&self) -> Poly {
        derivative(&self.derivative())
    }

    /// `P(A)` for an operator `A`.
    pub fn at(&self, a: &DiffOp) -> DiffOp {
        a.poly_in(&self.as_poly())
    }
}

pub fn derivative(p: &Poly) -> Poly {
    Poly::from_coeffs(
        p.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * int(k as i64))
            .collect(),
    )
}

/// `e^{ad_P}(A)` together with the index of its last nonzero term.
#[derive(Clone, Debug, PartialEq)]
pub struct AdSeries {
    pub image: DiffOp,
    /// Largest `J` with `ad_P^J(A) ≠ 0` (0 when `P` and `A` commute).
    pub order: usize,
}

pub fn exp_ad_series(p: &DiffOp, a: &DiffOp, max_order: usize) -> Result<AdSeries, AutomError> {
    let mut image = a.clone();
    let mut term = a.clone();
    let mut inv_fact = Rational::one();
    let mut order = 0;
    for j in 1..=max_order + 1 {
        term = p.commutator(&term);
        if term.is_zero() {
            return Ok(AdSeries { image, order });
        }
        if j > max_order {
            break;
        }
        inv_fact /= int(j as i64);
        image = &image + &term.scale(&inv_fact);
        order = j;
    }
    Err(AutomError::NotNilpotent { max_order })
}

/// `Σ_{j≥0} ad_P^j(A) / j!`, failing if `ad_P^{max_order+1}(A) ≠ 0`.
pub fn exp_ad(p: &DiffOp, a: &DiffOp, max_order: usize) -> Result<DiffOp, AutomError> {
    exp_ad_series(p, a, max_order).map(|s| s.image)
}

/// `Σ_{j≥0} P^j f / j!`, requiring each iterate to drop in degree.
///
/// `guard` bounds the number of applications of `P`; `None` uses `deg f + 1`.
pub fn exp_apply(p: &DiffOp, f: &Poly, guard: Option<usize>) -> Result<Poly, AutomError> {
    let guard = guard.unwrap_or_else(|| f.degree().map_or(1, |d| d + 1));
    let mut total = f.clone();
    let mut term = f.clone();
    for j in 1..=guard + 1 {
        if term.is_zero() {
            return Ok(total);
        }
        if j > guard {
            break;
        }
        let next = p.apply(&term).scale(&Rational::new(1.into(), (j as i64).into()));
        let lowered = match (next.degree(), term.degree()) {
            (None, _) => true,
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => false,
        };
        if !lowered {
            return Err(AutomError::NotLowering {
                iteration: j,
                degree: next.degree(),
                previous: term.degree(),
            });
        }
        total = &total + &next;
        term = next;
    }
    Err(AutomError::GuardExceeded { guard })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CharlierTarget {
    X,
    L,
    Delta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeixnerTarget {
    X,
    L,
    G,
}

/// Closed-form `e^{ad_{P(Δ)}}` images:
/// `x ↦ x + P'(Δ)D`, `x∇ ↦ x∇ − P'(Δ)Δ`, `Δ ↦ Δ`.
pub fn closed_sigma_charlier(p: &ModifierPoly, target: CharlierTarget) -> DiffOp {
    let delta = build(&OpName::Delta);
    let dp = delta.poly_in(&p.derivative());
    match target {
        CharlierTarget::X => &build(&OpName::MulX) + &dp.compose(&build(&OpName::D)),
        CharlierTarget::L => &build(&OpName::Lop) - &dp.compose(&delta),
        CharlierTarget::Delta => delta,
    }
}

/// Closed-form `e^{ad_{P(G)}}` images with `G = G(β)`, `R = [G, x]`.
///
/// In this normal form `[G, R] = 2G`, hence `[G^m, x] = m R G^{m−1} + m(m−1) G^{m−1}`,
/// `ad_P(x) = R P'(G) + P''(G) G`, `ad_P^2(x) = 2 P'(G)^2 G`, and
///
/// ```text
/// σ(x) = x + R·P'(G) + P''(G)·G + P'(G)²·G
/// σ(x∇) = x∇ − P'(G)·G
/// σ(G) = G
/// ```
pub fn closed_sigma_meixner(p: &ModifierPoly, beta: &Rational, target: MeixnerTarget) -> DiffOp {
    let g = build(&OpName::Gop(beta.clone()));
    let dp = g.poly_in(&p.derivative());
    match target {
        MeixnerTarget::X => {
            let r = build(&OpName::Rop(beta.clone()));
            let ddp = g.poly_in(&p.second_derivative());
            let dp_sq = dp.compose(&dp);
            let tail = &(&ddp + &dp_sq).compose(&g) + &r.compose(&dp);
            &build(&OpName::MulX) + &tail
        }
        MeixnerTarget::L => &build(&OpName::Lop) - &dp.compose(&g),
        MeixnerTarget::G => g,
    }
}

/// `x + R·P'(G) − P''(G)·G − P'(G)²·G`: the image of `x` under the opposite sign
/// convention `[G, R] = −2G`, with `R` placed to the left of `P'(G)`.
pub fn opposite_sign_sigma_meixner_x(p: &ModifierPoly, beta: &Rational) -> DiffOp {
    let g = build(&OpName::Gop(beta.clone()));
    let r = build(&OpName::Rop(beta.clone()));
    let dp = g.poly_in(&p.derivative());
    let ddp = g.poly_in(&p.second_derivative());
    let dp_sq = dp.compose(&dp);
    let tail = &r.compose(&dp) - &(&ddp + &dp_sq).compose(&g);
    &build(&OpName::MulX) + &tail
}

/// Outcome of comparing a series image with its closed form.
#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismReport {
    pub operator: String,
    pub series: DiffOp,
    pub closed: DiffOp,
    pub nilpotency_order: usize,
    #[serde(rename = "match")]
    pub matches: bool,
    /// Whether the opposite-sign reading agrees with the series (Meixner `x` only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opposite_sign_matches: Option<bool>,
}

pub fn verify_charlier(
    p: &ModifierPoly,
    target: CharlierTarget,
    max_order: usize,
) -> Result<AutomorphismReport, AutomError> {
    let generator = match target {
        CharlierTarget::X => build(&OpName::MulX),
        CharlierTarget::L => build(&OpName::Lop),
        CharlierTarget::Delta => build(&OpName::Delta),
    };
    let pd = p.at(&build(&OpName::Delta));
    let series = exp_ad_series(&pd, &generator, max_order)?;
    let closed = closed_sigma_charlier(p, target);
    Ok(AutomorphismReport {
        operator: format!("charlier:{target:?}").to_lowercase(),
        matches: series.image == closed,
        series: series.image,
        closed,
        nilpotency_order: series.order,
        opposite_sign_matches: None,
    })
}

pub fn verify_meixner(
    p: &ModifierPoly,
    beta: &Rational,
    target: MeixnerTarget,
    max_order: usize,
) -> Result<AutomorphismReport, AutomError> {
    let g = build(&OpName::Gop(beta.clone()));
    let generator = match target {
        MeixnerTarget::X => build(&OpName::MulX),
        MeixnerTarget::L => build(&OpName::Lop),
        MeixnerTarget::G => g.clone(),
    };
    let pg = p.at(&g);
    let series = exp_ad_series(&pg, &generator, max_order)?;
    let closed = closed_sigma_meixner(p, beta, target);
    let opposite_sign_matches = (target == MeixnerTarget::X)
        .then(|| opposite_sign_sigma_meixner_x(p, beta) == series.image);
    Ok(AutomorphismReport {
        operator: format!("meixner:{target:?}").to_lowercase(),
        matches: series.image == closed,
        series: series.image,
        closed,
        nilpotency_order: series.order,
        opposite_sign_matches,
    })
}
