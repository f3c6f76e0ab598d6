//! Charlier-Appell and Meixner-type polynomial families.
//!
//! Members are `P_n = e^{P(A)} (x)_n` with `A = Δ` (Charlier-Appell) or
//! `A = G(β)` (Meixner-type). Since `A` lowers degree by one and `P` has no
//! constant term the exponential is a finite sum, and each `P_n` is monic of
//! degree `n`. The bispectral operator is `L̃ = e^{ad_{P(A)}}(x∇)`, scaled by
//! `1 − c` in the Meixner case; it has the members as eigenfunctions because
//! `x∇ (x)_n = −n (x)_n`.

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::autom::{exp_ad, exp_apply, AutomError, ModifierPoly, DEFAULT_MAX_ORDER};
use crate::diffop::{build, DiffOp, OpName};
use crate::polyalg::{
    factorial, format_rational, int, rational_opt, rational_vec, rising_scalar,
    Poly, Rational,
};
use crate::vorth::{self, DegeneracyScan, MaroniReport, RecursionTable, VorthError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("invalid family spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Autom(#[from] AutomError),
    #[error("member {n} is not an eigenfunction of L~ (residual {residual})")]
    NotEigenfunction { n: usize, residual: Poly },
    #[error("eigenvalue at n={n} is {found}, expected {expected} for a linear spectrum")]
    EigenvalueNotLinear {
        n: usize,
        found: Rational,
        expected: Rational,
    },
    #[error("member {n} is not monic of degree {n}")]
    NotMonic { n: usize },
    #[error("lowering identity fails at n={n} (residual {residual})")]
    LoweringFailed { n: usize, residual: Poly },
    #[error(transparent)]
    Vorth(#[from] VorthError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    CharlierAppell,
    MeixnerType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub modifier: ModifierPoly,
    /// Meixner-type only.
    pub beta: Option<Rational>,
    /// Meixner-type only, `c ∉ {0, 1}`.
    pub c: Option<Rational>,
    pub nmax: usize,
}

impl FamilySpec {
    pub fn charlier_appell(modifier: ModifierPoly, nmax: usize) -> Self {
        FamilySpec {
            kind: FamilyKind::CharlierAppell,
            modifier,
            beta: None,
            c: None,
            nmax,
        }
    }

    pub fn meixner_type(
        modifier: ModifierPoly,
        beta: Rational,
        c: Rational,
        nmax: usize,
    ) -> Result<Self, FamilyError> {
        let spec = FamilySpec {
            kind: FamilyKind::MeixnerType,
            modifier,
            beta: Some(beta),
            c: Some(c),
            nmax,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        match self.kind {
            FamilyKind::CharlierAppell => Ok(()),
            FamilyKind::MeixnerType => {
                if self.beta.is_none() {
                    return Err(FamilyError::InvalidSpec(
                        "meixner-type family needs beta".into(),
                    ));
                }
                match &self.c {
                    None => Err(FamilyError::InvalidSpec("meixner-type family needs c".into())),
                    Some(c) if c.is_zero() || c.is_one() => Err(FamilyError::InvalidSpec(
                        format!("c must differ from 0 and 1, got {c}"),
                    )),
                    Some(_) => Ok(()),
                }
            }
        }
    }

    fn beta_or_zero(&self) -> Rational {
        self.beta.clone().unwrap_or_else(Rational::zero)
    }

    /// `Δ` or `G(β)`.
    pub fn lowering_operator(&self) -> DiffOp {
        match self.kind {
            FamilyKind::CharlierAppell => build(&OpName::Delta),
            FamilyKind::MeixnerType => build(&OpName::Gop(self.beta_or_zero())),
        }
    }

    /// Eigen-factor of the lowering operator on `(x)_n`: `n` or `n(n + β)`.
    pub fn lowering_factor(&self, n: usize) -> Rational {
        let nn = int(n as i64);
        match self.kind {
            FamilyKind::CharlierAppell => nn,
            FamilyKind::MeixnerType => &nn * (&nn + self.beta_or_zero()),
        }
    }

    /// `P(Δ)` or `P(G)`.
    pub fn modifier_operator(&self) -> DiffOp {
        self.modifier.at(&self.lowering_operator())
    }

    /// Band depth of `x P_n` implied by the construction: `d` for Charlier-Appell,
    /// `2d − 1` for Meixner-type (the image of `x` involves `P'(G)^2 G`).
    pub fn expected_band_depth(&self) -> usize {
        let d = self.modifier.degree();
        match self.kind {
            FamilyKind::CharlierAppell => d,
            FamilyKind::MeixnerType => 2 * d - 1,
        }
    }

    pub fn with_nmax(&self, nmax: usize) -> FamilySpec {
        FamilySpec {
            nmax,
            ..self.clone()
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    kind: FamilyKind,
    #[serde(rename = "P", with = "rational_vec")]
    p: Vec<Rational>,
    #[serde(
        default,
        with = "rational_opt",
        skip_serializing_if = "Option::is_none"
    )]
    beta: Option<Rational>,
    #[serde(
        default,
        with = "rational_opt",
        skip_serializing_if = "Option::is_none"
    )]
    c: Option<Rational>,
    nmax: usize,
}

impl Serialize for FamilySpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawSpec {
            kind: self.kind,
            p: self.modifier.coeffs().to_vec(),
            beta: self.beta.clone(),
            c: self.c.clone(),
            nmax: self.nmax,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FamilySpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawSpec::deserialize(d)?;
        let modifier = ModifierPoly::new(raw.p).map_err(serde::de::Error::custom)?;
        let spec = FamilySpec {
            kind: raw.kind,
            modifier,
            beta: raw.beta,
            c: raw.c,
            nmax: raw.nmax,
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFamily {
    pub spec: FamilySpec,
    pub members: Vec<Poly>,
    #[serde(rename = "tildeL")]
    pub tilde_l: DiffOp,
    #[serde(with = "rational_vec")]
    pub eigenvalues: Vec<Rational>,
}

impl PolyFamily {
    pub fn nmax(&self) -> usize {
        self.members.len().saturating_sub(1)
    }

    /// The same family restricted to members `0..=nmax`.
    pub fn truncated(&self, nmax: usize) -> PolyFamily {
        let keep = (nmax + 1).min(self.members.len());
        PolyFamily {
            spec: self.spec.with_nmax(keep.saturating_sub(1)),
            members: self.members[..keep].to_vec(),
            tilde_l: self.tilde_l.clone(),
            eigenvalues: self.eigenvalues.iter().take(keep).cloned().collect(),
        }
    }
}

pub fn generate(spec: &FamilySpec) -> Result<PolyFamily, FamilyError> {
    generate_with(spec, DEFAULT_MAX_ORDER)
}

/// Builds members, `L̃` and the verified eigenvalues; `max_order` bounds `e^{ad}`.
pub fn generate_with(spec: &FamilySpec, max_order: usize) -> Result<PolyFamily, FamilyError> {
    spec.validate()?;
    let p_op = spec.modifier_operator();
    let members = (0..=spec.nmax)
        .map(|n| {
            let m = exp_apply(&p_op, &Poly::falling_factorial(n), None)?;
            if !m.is_monic() || m.degree() != Some(n) {
                return Err(FamilyError::NotMonic { n });
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>, FamilyError>>()?;
    let mut fam = PolyFamily {
        spec: spec.clone(),
        members,
        tilde_l: bispectral_operator_with(spec, max_order)?,
        eigenvalues: Vec::new(),
    };
    fam.eigenvalues = eigencheck(&fam)?;
    Ok(fam)
}

pub fn bispectral_operator(spec: &FamilySpec) -> Result<DiffOp, FamilyError> {
    bispectral_operator_with(spec, DEFAULT_MAX_ORDER)
}

/// `e^{ad_{P(Δ)}}(x∇)` or `(1 − c)·e^{ad_{P(G)}}(x∇)`.
pub fn bispectral_operator_with(spec: &FamilySpec, max_order: usize) -> Result<DiffOp, FamilyError> {
    spec.validate()?;
    let image = exp_ad(&spec.modifier_operator(), &build(&OpName::Lop), max_order)?;
    Ok(match spec.kind {
        FamilyKind::CharlierAppell => image,
        FamilyKind::MeixnerType => {
            let c = spec.c.clone().unwrap_or_else(Rational::zero);
            image.scale(&(Rational::one() - c))
        }
    })
}

/// Eigenvalues `λ_n` with `L̃ P_n = λ_n P_n`, checked exactly and required to satisfy
/// `λ_n = n λ_1`.
pub fn eigencheck(fam: &PolyFamily) -> Result<Vec<Rational>, FamilyError> {
    let mut eigenvalues = Vec::with_capacity(fam.members.len());
    for (n, member) in fam.members.iter().enumerate() {
        let image = fam.tilde_l.apply(member);
        let lead = member
            .leading_coeff()
            .cloned()
            .ok_or(FamilyError::NotMonic { n })?;
        let lambda = image.coeff(n) / lead;
        let residual = &image - &member.scale(&lambda);
        if !residual.is_zero() {
            return Err(FamilyError::NotEigenfunction { n, residual });
        }
        eigenvalues.push(lambda);
    }
    let slope = eigenvalues.get(1).cloned().unwrap_or_else(Rational::zero);
    for (n, lambda) in eigenvalues.iter().enumerate() {
        let expected = &slope * int(n as i64);
        if *lambda != expected {
            return Err(FamilyError::EigenvalueNotLinear {
                n,
                found: lambda.clone(),
                expected,
            });
        }
    }
    Ok(eigenvalues)
}

/// Number of indices `1 ≤ n ≤ nmax` on which the lowering identity was verified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoweringReport {
    pub verified: usize,
}

/// `Δ P_n = n P_{n−1}` or `G P_n = n(n + β) P_{n−1}` for every `1 ≤ n ≤ nmax`.
pub fn lowering_check(fam: &PolyFamily) -> Result<LoweringReport, FamilyError> {
    let op = fam.spec.lowering_operator();
    for n in 1..fam.members.len() {
        let lhs = op.apply(&fam.members[n]);
        let rhs = fam.members[n - 1].scale(&fam.spec.lowering_factor(n));
        let residual = &lhs - &rhs;
        if !residual.is_zero() {
            return Err(FamilyError::LoweringFailed { n, residual });
        }
    }
    Ok(LoweringReport {
        verified: fam.members.len().saturating_sub(1),
    })
}

/// Monic Charlier polynomial `(−a)^n C_n(x; a)` from the terminating series
/// `C_n(x; a) = ₂F₀(−n, −x; ; −1/a) = Σ_{k=0}^{n} (−n)_k (−x)_k (−1/a)^k / k!`
/// with rising Pochhammer symbols, rewritten over falling factorials via
/// `(−x)_k = (−1)^k (x)_k`.
pub fn classical_charlier(a: &Rational, n: usize) -> Result<Poly, FamilyError> {
    if a.is_zero() {
        return Err(FamilyError::InvalidSpec("Charlier parameter a must be nonzero".into()));
    }
    let minus_n = -int(n as i64);
    let z = -a.recip();
    let mut sum = Poly::zero();
    for k in 0..=n {
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        let c = rising_scalar(&minus_n, k) * sign * pow(&z, k) / factorial(k);
        sum = &sum + &Poly::falling_factorial(k).scale(&c);
    }
    Ok(sum.scale(&pow(&-a, n)))
}

/// Monic Meixner polynomial `M_n(x; β, c)` from
/// `₂F₁(−n, −x; β; 1 − 1/c)`, rescaled by `(β)_n (c/(c−1))^n`.
pub fn classical_meixner(beta: &Rational, c: &Rational, n: usize) -> Result<Poly, FamilyError> {
    if c.is_zero() || c.is_one() {
        return Err(FamilyError::InvalidSpec(format!(
            "Meixner parameter c must differ from 0 and 1, got {c}"
        )));
    }
    if rising_scalar(beta, n).is_zero() {
        return Err(FamilyError::InvalidSpec(format!(
            "Meixner parameter beta = {beta} makes the series singular at n = {n}"
        )));
    }
    let z = Rational::one() - c.recip();
    let minus_n = -int(n as i64);
    let mut sum = Poly::zero();
    for k in 0..=n {
        // (−x)_k rising = (−1)^k (x)_k falling
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        let coeff = rising_scalar(&minus_n, k) * sign * pow(&z, k)
            / (rising_scalar(beta, k) * factorial(k));
        sum = &sum + &Poly::falling_factorial(k).scale(&coeff);
    }
    Ok(sum.scale(&(rising_scalar(beta, n) / pow(&z, n))))
}

fn pow(base: &Rational, e: usize) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * base)
}

/// `aΔ + x∇`.
pub fn charlier_operator(a: &Rational) -> DiffOp {
    &build(&OpName::Delta).scale(a) + &build(&OpName::Lop)
}

/// `c(x + β)Δ + x∇`.
pub fn meixner_operator(beta: &Rational, c: &Rational) -> DiffOp {
    let xb = DiffOp::mul_poly(Poly::from_coeffs(vec![beta.clone(), Rational::one()]));
    &xb.compose(&build(&OpName::Delta)).scale(c) + &build(&OpName::Lop)
}

/// Parameters with `op = scale · [c(x + β)Δ + x∇]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeixnerFit {
    #[serde(with = "crate::polyalg::rational_str")]
    pub scale: Rational,
    #[serde(with = "crate::polyalg::rational_str")]
    pub beta: Rational,
    #[serde(with = "crate::polyalg::rational_str")]
    pub c: Rational,
}

/// Solves `op = s · [c(x + β)Δ + x∇]` for `(s, β, c)` with `s, c ≠ 0`.
pub fn fit_meixner_operator(op: &DiffOp) -> Option<MeixnerFit> {
    let back = op.coeff(-1)?;
    if back.degree() != Some(1) || !back.coeff(0).is_zero() {
        return None;
    }
    let scale = back.coeff(1);
    let fwd = op.coeff(1)?;
    if fwd.degree() != Some(1) {
        return None;
    }
    let sc = fwd.coeff(1);
    let c = &sc / &scale;
    let beta = fwd.coeff(0) / &sc;
    if c.is_one() {
        return None;
    }
    (meixner_operator(&beta, &c).scale(&scale) == *op).then_some(MeixnerFit { scale, beta, c })
}

/// Comparison of `P = αX`, `α = c/(1 − c)` against the classical Meixner operator.
#[derive(Clone, Debug, Serialize)]
pub struct MeixnerSpecialization {
    #[serde(with = "crate::polyalg::rational_str")]
    pub alpha: Rational,
    #[serde(rename = "tildeL")]
    pub tilde_l: DiffOp,
    /// `s` with `L̃ = s · [c(x + β)Δ + x∇]` at the requested `(β, c)`, if any.
    #[serde(with = "crate::polyalg::rational_opt")]
    pub ratio_to_requested: Option<Rational>,
    /// Classical parameters `L̃` actually matches.
    pub fit: Option<MeixnerFit>,
    /// Whether `L̃` at `α = −c/(1 − c)` equals `c(x + β + 1)Δ + x∇` exactly.
    pub negated_alpha_is_shifted_meixner: bool,
    /// First index where the family differs from the fitted classical polynomials.
    pub first_mismatch: Option<usize>,
}

pub fn meixner_specialization(
    beta: &Rational,
    c: &Rational,
    nmax: usize,
) -> Result<MeixnerSpecialization, FamilyError> {
    if c.is_zero() || c.is_one() {
        return Err(FamilyError::InvalidSpec(format!("c must differ from 0 and 1, got {c}")));
    }
    let alpha = c / (Rational::one() - c);
    let spec = FamilySpec::meixner_type(
        ModifierPoly::new(vec![alpha.clone()])?,
        beta.clone(),
        c.clone(),
        nmax,
    )?;
    let fam = generate(&spec)?;
    let requested = meixner_operator(beta, c);
    let ratio_to_requested = fam.tilde_l.ratio_to(&requested);
    let fit = fit_meixner_operator(&fam.tilde_l);

    let negated = FamilySpec::meixner_type(
        ModifierPoly::new(vec![-&alpha])?,
        beta.clone(),
        c.clone(),
        0,
    )?;
    let negated_alpha_is_shifted_meixner =
        bispectral_operator(&negated)? == meixner_operator(&(beta + int(1)), c);

    let first_mismatch = match &fit {
        Some(f) => {
            let mut mismatch = None;
            for (n, member) in fam.members.iter().enumerate() {
                match classical_meixner(&f.beta, &f.c, n) {
                    Ok(q) if q == *member => {}
                    _ => {
                        mismatch = Some(n);
                        break;
                    }
                }
            }
            mismatch
        }
        None => Some(0),
    };
    Ok(MeixnerSpecialization {
        alpha,
        tilde_l: fam.tilde_l,
        ratio_to_requested,
        fit,
        negated_alpha_is_shifted_meixner,
        first_mismatch,
    })
}

/// Meixner-type family at `β = −N` and its degenerate deepest band.
#[derive(Clone, Debug, Serialize)]
pub struct KravchukReport {
    pub n_param: usize,
    pub family: PolyFamily,
    pub table: RecursionTable,
    pub scan: DegeneracyScan,
    /// First `n ≥ d_effective` where the deepest coefficient vanishes.
    pub first_zero: Option<usize>,
    /// Vector orthogonality on the family truncated to `M_0, ..., M_N`.
    pub truncated_maroni: Result<MaroniReport, VorthError>,
}

/// Generates the `β = −N` family up to `nmax > N` (at least `N + 3`) and scans its
/// recursion for vanishing deepest-band coefficients.
pub fn kravchuk_truncation(
    p: &ModifierPoly,
    big_n: usize,
    c: &Rational,
    nmax: Option<usize>,
) -> Result<KravchukReport, FamilyError> {
    if big_n == 0 {
        return Err(FamilyError::InvalidSpec("N must be positive".into()));
    }
    let nmax = nmax.unwrap_or(big_n + 3).max(big_n + 1);
    let spec = FamilySpec::meixner_type(p.clone(), -int(big_n as i64), c.clone(), nmax)?;
    let family = generate(&spec)?;
    let table = vorth::recursion_table(&family)?;
    let scan = vorth::degeneracy_scan(&table);
    let first_zero = scan.zeros.first().map(|&(n, _)| n);
    let truncated = family.truncated(big_n);
    let depth = table.d_effective.max(1);
    let truncated_maroni = vorth::maroni_check(&truncated, depth);
    Ok(KravchukReport {
        n_param: big_n,
        family,
        table,
        scan,
        first_zero,
        truncated_maroni,
    })
}

impl std::fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p: Vec<String> = self.modifier.coeffs().iter().map(format_rational).collect();
        write!(f, "{:?} P=[{}] nmax={}", self.kind, p.join(","), self.nmax)?;
        if let Some(b) = &self.beta {
            write!(f, " beta={b}")?;
        }
        if let Some(c) = &self.c {
            write!(f, " c={c}")?;
        }
        Ok(())
    }
}
