//! Recursion extraction and vector orthogonality.
//!
//! A monic family `{P_n}` with `deg P_n = n` is a basis, so any polynomial of
//! degree `≤ nmax` has a unique expansion over it. Expanding `x P_n` gives the
//! recursion coefficients `x P_n = P_{n+1} + Σ_j γ_j(n) P_{n−j}`. The k-th dual
//! functional `u_k(f)` is the coefficient of `P_k` in `f`; for a family with band
//! depth `d` these functionals satisfy
//!
//! ```text
//! u_k(P_m P_n) = 0     for m > n·d + k
//! u_k(P_n P_{n·d+k}) ≠ 0
//! ```
//!
//! whenever every deepest coefficient `γ_d` along the way is nonzero.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::autom::ModifierPoly;
use crate::families::PolyFamily;
use crate::polyalg::{falling_scalar, format_rational, int, rational_vec, Poly, Rational};

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum VorthError {
    #[error("degree {degree} exceeds family nmax {nmax}")]
    DegreeOverflow { degree: usize, nmax: usize },
    #[error("family has {members} member(s); at least 2 are needed for a recursion")]
    TooFewMembers { members: usize },
    #[error("x·P_{n} has nonzero coefficient at P_{m}, below the band")]
    BandViolation { n: usize, m: usize },
    #[error("x·P_{n} has coefficient {found} at P_{next}, expected 1", next = n + 1)]
    NotMonicStep { n: usize, found: String },
    #[error("recursion does not reconstruct P_{next} (residual {residual})", next = n + 1)]
    ReconstructionFailed { n: usize, residual: String },
    #[error("u_{k}(P_{m}·P_{n}) = {value} violates the {condition} condition")]
    OrthogonalityFailed {
        k: usize,
        m: usize,
        n: usize,
        value: String,
        condition: MaroniCondition,
    },
    #[error("depth must be at least 1")]
    ZeroDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaroniCondition {
    MustVanish,
    MustNotVanish,
}

impl std::fmt::Display for MaroniCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MaroniCondition::MustVanish => "vanishing",
            MaroniCondition::MustNotVanish => "non-vanishing",
        })
    }
}

/// Coefficients `c_m` with `f = Σ c_m P_m`, by descending-degree elimination.
/// The result has one entry per family member.
pub fn expand_in_family(f: &Poly, fam: &PolyFamily) -> Result<Vec<Rational>, VorthError> {
    let nmax = fam.nmax();
    let mut out = vec![Rational::zero(); fam.members.len()];
    let Some(deg) = f.degree() else {
        return Ok(out);
    };
    if deg > nmax || fam.members.is_empty() {
        return Err(VorthError::DegreeOverflow { degree: deg, nmax });
    }
    let mut rest = f.clone();
    for m in (0..=deg).rev() {
        let c = rest.coeff(m);
        if c.is_zero() {
            continue;
        }
        let member = &fam.members[m];
        let c = c / member.coeff(m);
        rest = &rest - &member.scale(&c);
        out[m] = c;
    }
    debug_assert!(rest.is_zero());
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionRow {
    pub n: usize,
    /// `gammas[j] = γ_j(n)` for `0 ≤ j ≤ min(n, d)`.
    #[serde(with = "rational_vec")]
    pub gammas: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionTable {
    /// Band depth allowed by the construction.
    pub d: usize,
    /// Deepest band with a nonzero entry.
    pub d_effective: usize,
    pub rows: Vec<RecursionRow>,
}

impl RecursionTable {
    /// `γ_j(n)`, zero when outside the stored band.
    pub fn gamma(&self, n: usize, j: usize) -> Rational {
        self.rows
            .get(n)
            .and_then(|r| r.gammas.get(j).cloned())
            .unwrap_or_else(Rational::zero)
    }

    /// One row per `n` with columns `n, gamma_0, ..., gamma_d`; cells below `P_0` are empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["n".to_string()];
        header.extend((0..=self.d).map(|j| format!("gamma_{j}")));
        w.write_record(&header).expect("in-memory csv");
        for row in &self.rows {
            let mut rec = vec![row.n.to_string()];
            rec.extend((0..=self.d).map(|j| {
                row.gammas.get(j).map(format_rational).unwrap_or_default()
            }));
            w.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }
}

/// Expands `x P_n` for `0 ≤ n < nmax`, enforcing the band `j ≤ spec.expected_band_depth()`.
pub fn recursion_table(fam: &PolyFamily) -> Result<RecursionTable, VorthError> {
    if fam.members.len() < 2 {
        return Err(VorthError::TooFewMembers {
            members: fam.members.len(),
        });
    }
    let d = fam.spec.expected_band_depth();
    let mut rows = Vec::with_capacity(fam.nmax());
    let mut d_effective = 0;
    for n in 0..fam.nmax() {
        let xp = &Poly::x() * &fam.members[n];
        let coeffs = expand_in_family(&xp, fam)?;
        if !coeffs[n + 1].is_one() {
            return Err(VorthError::NotMonicStep {
                n,
                found: format_rational(&coeffs[n + 1]),
            });
        }
        if let Some(m) = (0..n.saturating_sub(d)).find(|&m| !coeffs[m].is_zero()) {
            return Err(VorthError::BandViolation { n, m });
        }
        let gammas: Vec<Rational> = (0..=n.min(d)).map(|j| coeffs[n - j].clone()).collect();
        if let Some(j) = gammas.iter().rposition(|g| !g.is_zero()) {
            d_effective = d_effective.max(j);
        }
        rows.push(RecursionRow { n, gammas });
    }
    Ok(RecursionTable {
        d,
        d_effective,
        rows,
    })
}

/// Checks `P_{n+1} = x P_n − Σ_j γ_j(n) P_{n−j}` for every row of `table`.
pub fn verify_reconstruction(table: &RecursionTable, fam: &PolyFamily) -> Result<(), VorthError> {
    for row in &table.rows {
        let n = row.n;
        if n + 1 >= fam.members.len() {
            break;
        }
        let mut rhs = &Poly::x() * &fam.members[n];
        for (j, g) in row.gammas.iter().enumerate() {
            rhs = &rhs - &fam.members[n - j].scale(g);
        }
        let residual = &fam.members[n + 1] - &rhs;
        if !residual.is_zero() {
            return Err(VorthError::ReconstructionFailed {
                n,
                residual: residual.to_string(),
            });
        }
    }
    Ok(())
}

/// Closed-form Charlier-Appell coefficient `(n)_j (jβ_j + (j+1)β_{j+1})`, `β_{d+1} = 0`.
pub fn predicted_charlier_coefficient(p: &ModifierPoly, n: usize, j: usize) -> Rational {
    let jj = int(j as i64);
    let weight = &jj * p.coeff(j) + (&jj + int(1)) * p.coeff(j + 1);
    falling_scalar(&int(n as i64), j) * weight
}

/// Recursion coefficient of `C_n^P = e^{P(Δ)} (x)_n` derived from
/// `e^{−P} x e^{P} = x − P'(Δ) D` and `P'(Δ)(Δ + 1) = Σ_i (iβ_i + (i+1)β_{i+1}) Δ^i`:
/// `γ_0(n) = n − β_1` and `γ_j(n) = −(n)_j (jβ_j + (j+1)β_{j+1})` for `j ≥ 1`.
pub fn charlier_recursion_coefficient(p: &ModifierPoly, n: usize, j: usize) -> Rational {
    if j == 0 {
        return int(n as i64) - p.coeff(1);
    }
    -predicted_charlier_coefficient(p, n, j)
}

/// `u_k(f)`: the coefficient of `P_k` in the expansion of `f` over the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualFunctional {
    pub k: usize,
}

impl DualFunctional {
    pub fn apply(&self, f: &Poly, fam: &PolyFamily) -> Result<Rational, VorthError> {
        let coeffs = expand_in_family(f, fam)?;
        Ok(coeffs.get(self.k).cloned().unwrap_or_else(Rational::zero))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaroniReport {
    pub d: usize,
    pub members: usize,
    pub vanishing_checked: usize,
    pub nonvanishing_checked: usize,
}

/// Checks both Maroni conditions for `k < d` over all `(m, n)` with `m + n ≤ nmax`.
pub fn maroni_check(fam: &PolyFamily, d: usize) -> Result<MaroniReport, VorthError> {
    if d == 0 {
        return Err(VorthError::ZeroDepth);
    }
    let nmax = fam.nmax();
    let mut vanishing_checked = 0;
    let mut nonvanishing_checked = 0;
    for n in 0..=nmax {
        for m in 0..=nmax - n {
            let product = &fam.members[m] * &fam.members[n];
            let coeffs = expand_in_family(&product, fam)?;
            for k in 0..d {
                let value = coeffs.get(k).cloned().unwrap_or_else(Rational::zero);
                let fail = |condition| VorthError::OrthogonalityFailed {
                    k,
                    m,
                    n,
                    value: format_rational(&value),
                    condition,
                };
                if m > n * d + k {
                    vanishing_checked += 1;
                    if !value.is_zero() {
                        return Err(fail(MaroniCondition::MustVanish));
                    }
                } else if m == n * d + k {
                    nonvanishing_checked += 1;
                    if value.is_zero() {
                        return Err(fail(MaroniCondition::MustNotVanish));
                    }
                }
            }
        }
    }
    Ok(MaroniReport {
        d,
        members: fam.members.len(),
        vanishing_checked,
        nonvanishing_checked,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyScan {
    pub depth: usize,
    /// `(n, j)` with `γ_j(n) = 0`, `j = depth`, `n ≥ depth`.
    pub zeros: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Lists the vanishing coefficients of the deepest nonzero band.
pub fn degeneracy_scan(table: &RecursionTable) -> DegeneracyScan {
    let depth = table.d_effective;
    if table.rows.len() <= table.d || depth == 0 {
        return DegeneracyScan {
            depth,
            zeros: Vec::new(),
            warning: Some(format!(
                "only {} recursion row(s) for band depth {}: nothing to scan",
                table.rows.len(),
                table.d
            )),
        };
    }
    let zeros = table
        .rows
        .iter()
        .filter(|r| r.n >= depth && r.gammas[depth].is_zero())
        .map(|r| (r.n, depth))
        .collect();
    DegeneracyScan {
        depth,
        zeros,
        warning: None,
    }
}
