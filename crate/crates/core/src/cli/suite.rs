//! Verification checks run by `vopkit check` and `vopkit classical`.

use clap::ValueEnum;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ledger::VerificationLedger;
use crate::autom::{
    exp_ad, exp_apply, verify_charlier, verify_meixner, AutomorphismReport, CharlierTarget,
    MeixnerTarget,
};
use crate::diffop::{build, DiffOp, OpName};
use crate::families::{
    bispectral_operator_with, charlier_operator, classical_charlier, eigencheck, generate_with,
    lowering_check, meixner_specialization, FamilyError, FamilyKind, FamilySpec, PolyFamily,
};
use crate::polyalg::{format_rational, int, Poly, Rational};
use crate::vorth::{
    charlier_recursion_coefficient, degeneracy_scan, maroni_check, predicted_charlier_coefficient,
    recursion_table, verify_reconstruction, RecursionTable,
};

/// Members compared against intertwining identities; larger indices add cost, not coverage.
const INTERTWINING_LIMIT: usize = 10;

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Eigen,
    Lowering,
    Recursion,
    Orthogonality,
    ClosedForms,
    Degeneracy,
    All,
}

impl CheckName {
    pub const SUITE: [CheckName; 6] = [
        CheckName::Eigen,
        CheckName::Lowering,
        CheckName::Recursion,
        CheckName::Orthogonality,
        CheckName::ClosedForms,
        CheckName::Degeneracy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Eigen => "eigen",
            CheckName::Lowering => "lowering",
            CheckName::Recursion => "recursion",
            CheckName::Orthogonality => "orthogonality",
            CheckName::ClosedForms => "closed-forms",
            CheckName::Degeneracy => "degeneracy",
            CheckName::All => "all",
        }
    }
}

/// Expands `all`, drops duplicates and sorts into suite order; empty means `all`.
pub fn canonical_checks(selection: &[CheckName]) -> Vec<CheckName> {
    if selection.is_empty() || selection.contains(&CheckName::All) {
        return CheckName::SUITE.to_vec();
    }
    let mut out = selection.to_vec();
    out.sort();
    out.dedup();
    out
}

pub fn run_checks(fam: &PolyFamily, checks: &[CheckName], max_order: usize) -> VerificationLedger {
    let mut ledger = VerificationLedger::new();
    for check in canonical_checks(checks) {
        match check {
            CheckName::Eigen => check_eigen(fam, &mut ledger),
            CheckName::Lowering => check_lowering(fam, &mut ledger),
            CheckName::Recursion => check_recursion(fam, &mut ledger),
            CheckName::Orthogonality => check_orthogonality(fam, &mut ledger),
            CheckName::ClosedForms => check_closed_forms(fam, max_order, &mut ledger),
            CheckName::Degeneracy => check_degeneracy(fam, &mut ledger),
            CheckName::All => unreachable!("expanded by canonical_checks"),
        }
    }
    ledger
}

/// Eigenvalue slope the classical normalisation asserts: `1` or `1 − c`.
fn claimed_slope(spec: &FamilySpec) -> Rational {
    match spec.kind {
        FamilyKind::CharlierAppell => Rational::one(),
        FamilyKind::MeixnerType => Rational::one() - spec.c.clone().unwrap_or_else(Rational::zero),
    }
}

fn check_eigen(fam: &PolyFamily, ledger: &mut VerificationLedger) {
    let name = CheckName::Eigen.as_str();
    let eigs = match eigencheck(fam) {
        Ok(e) => e,
        Err(e) => return ledger.fail(name, e.to_string()),
    };
    if !fam.eigenvalues.is_empty() && fam.eigenvalues != eigs {
        let n = fam
            .eigenvalues
            .iter()
            .zip(&eigs)
            .position(|(a, b)| a != b)
            .unwrap_or(eigs.len().min(fam.eigenvalues.len()));
        return ledger.fail(
            name,
            format!("stored eigenvalue list disagrees with L~ at n={n}"),
        );
    }
    let slope = eigs.get(1).cloned().unwrap_or_else(Rational::zero);
    ledger.pass(
        name,
        format!(
            "L~ P_n = ({})·n·P_n for 0 <= n <= {}",
            format_rational(&slope),
            fam.nmax()
        ),
    );
    ledger.constant("eigenvalue_slope", format_rational(&slope));
    let claimed = claimed_slope(&fam.spec);
    if fam.nmax() >= 1 && slope != claimed {
        ledger.erratum(
            "erratum:eigenvalue-sign",
            format!(
                "stated eigenvalue {}·n, computed {}·n; x∇ (x)_n = −n (x)_n",
                format_rational(&claimed),
                format_rational(&slope)
            ),
        );
    }
}

fn check_lowering(fam: &PolyFamily, ledger: &mut VerificationLedger) {
    let name = CheckName::Lowering.as_str();
    let what = match fam.spec.kind {
        FamilyKind::CharlierAppell => "Δ P_n = n P_{n-1}",
        FamilyKind::MeixnerType => "G P_n = n(n+β) P_{n-1}",
    };
    match lowering_check(fam) {
        Ok(r) => ledger.pass(name, format!("{what} for 1 <= n <= {}", r.verified)),
        Err(e) => ledger.fail(name, e.to_string()),
    }
}

fn check_recursion(fam: &PolyFamily, ledger: &mut VerificationLedger) {
    let name = CheckName::Recursion.as_str();
    let table = match recursion_table(fam) {
        Ok(t) => t,
        Err(e) => return ledger.fail(name, e.to_string()),
    };
    if let Err(e) = verify_reconstruction(&table, fam) {
        return ledger.fail(name, e.to_string());
    }
    ledger.constant("band_depth", table.d_effective);
    ledger.constant("band_depth_bound", table.d);
    if fam.spec.kind == FamilyKind::CharlierAppell {
        if let Some((n, j)) = first_charlier_mismatch(fam, &table, charlier_recursion_coefficient) {
            return ledger.fail(
                name,
                format!(
                    "γ_{j}({n}) = {} differs from the derived closed form {}",
                    format_rational(&table.gamma(n, j)),
                    format_rational(&charlier_recursion_coefficient(&fam.spec.modifier, n, j))
                ),
            );
        }
    }
    ledger.pass(
        name,
        format!(
            "band depth {} (bound {}), reconstruction exact for n < {}",
            table.d_effective,
            table.d,
            fam.nmax()
        ),
    );
    if fam.spec.kind == FamilyKind::CharlierAppell {
        let printed = |p: &_, n, j| {
            if j == 0 {
                int(n as i64)
            } else {
                predicted_charlier_coefficient(p, n, j)
            }
        };
        if let Some((n, j)) = first_charlier_mismatch(fam, &table, printed) {
            ledger.erratum(
                "erratum:charlier-recursion",
                format!(
                    "stated γ_{j}({n}) = {}, extracted {}; exact form is γ_0(n) = n − β_1, \
                     γ_j(n) = −(n)_j (jβ_j + (j+1)β_{{j+1}})",
                    format_rational(&printed(&fam.spec.modifier, n, j)),
                    format_rational(&table.gamma(n, j))
                ),
            );
        }
    }
}

fn first_charlier_mismatch(
    fam: &PolyFamily,
    table: &RecursionTable,
    formula: impl Fn(&crate::autom::ModifierPoly, usize, usize) -> Rational,
) -> Option<(usize, usize)> {
    table.rows.iter().find_map(|row| {
        (0..row.gammas.len())
            .find(|&j| row.gammas[j] != formula(&fam.spec.modifier, row.n, j))
            .map(|j| (row.n, j))
    })
}

fn check_orthogonality(fam: &PolyFamily, ledger: &mut VerificationLedger) {
    let name = CheckName::Orthogonality.as_str();
    let table = match recursion_table(fam) {
        Ok(t) => t,
        Err(e) => return ledger.fail(name, e.to_string()),
    };
    let d = table.d_effective.max(1);
    let scan = degeneracy_scan(&table);
    let (target, note) = match scan.zeros.first() {
        Some(&(n, j)) => (
            fam.truncated(n),
            format!("; γ_{j}({n}) = 0, so checked on P_0..P_{n}"),
        ),
        None => (fam.clone(), String::new()),
    };
    match maroni_check(&target, d) {
        Ok(r) => ledger.pass(
            name,
            format!(
                "d = {d}: {} vanishing and {} non-vanishing conditions on m + n <= {}{note}",
                r.vanishing_checked,
                r.nonvanishing_checked,
                target.nmax()
            ),
        ),
        Err(e) => ledger.fail(name, e.to_string()),
    }
    ledger.erratum(
        "erratum:maroni-index",
        "the non-vanishing condition holds at m = n·d + k; the index n(d+1) + k \
         lies inside the vanishing range m > n·d + k for n >= 1",
    );
}

fn check_closed_forms(fam: &PolyFamily, max_order: usize, ledger: &mut VerificationLedger) {
    let name = CheckName::ClosedForms.as_str();
    match closed_forms(fam, max_order, ledger) {
        Ok(summary) => ledger.pass(name, summary),
        Err(msg) => ledger.fail(name, msg),
    }
}

fn closed_forms(
    fam: &PolyFamily,
    max_order: usize,
    ledger: &mut VerificationLedger,
) -> Result<String, String> {
    let spec = &fam.spec;
    let p = &spec.modifier;
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let (reports, generators): (Vec<AutomorphismReport>, Vec<DiffOp>) = match spec.kind {
        FamilyKind::CharlierAppell => {
            let targets = [CharlierTarget::X, CharlierTarget::L, CharlierTarget::Delta];
            let reports = targets
                .iter()
                .map(|&t| verify_charlier(p, t, max_order))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(&e))?;
            let gens = vec![build(&OpName::MulX), build(&OpName::Lop), build(&OpName::Delta)];
            (reports, gens)
        }
        FamilyKind::MeixnerType => {
            let beta = spec.beta.clone().unwrap_or_else(Rational::zero);
            let targets = [MeixnerTarget::X, MeixnerTarget::L, MeixnerTarget::G];
            let reports = targets
                .iter()
                .map(|&t| verify_meixner(p, &beta, t, max_order))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(&e))?;
            let gens = vec![
                build(&OpName::MulX),
                build(&OpName::Lop),
                build(&OpName::Gop(beta)),
            ];
            (reports, gens)
        }
    };
    if let Some(r) = reports.iter().find(|r| !r.matches) {
        return Err(format!(
            "{}: series image {} differs from closed form {}",
            r.operator, r.series, r.closed
        ));
    }
    let orders: Vec<String> = reports
        .iter()
        .map(|r| format!("{}={}", r.operator, r.nilpotency_order))
        .collect();
    ledger.constant(
        "nilpotency_orders",
        json!(reports
            .iter()
            .map(|r| (r.operator.clone(), r.nilpotency_order))
            .collect::<std::collections::BTreeMap<_, _>>()),
    );

    let p_op = spec.modifier_operator();
    let limit = fam.members.len().min(INTERTWINING_LIMIT + 1);
    for (gen, report) in generators.iter().zip(&reports) {
        for n in 0..limit {
            let lhs = report.series.apply(&fam.members[n]);
            let rhs = exp_apply(&p_op, &gen.apply(&Poly::falling_factorial(n)), None)
                .map_err(|e| err(&e))?;
            if lhs != rhs {
                return Err(format!(
                    "{}: σ(A) P_{n} differs from e^P A (x)_{n}",
                    report.operator
                ));
            }
        }
    }

    let expected = bispectral_operator_with(spec, max_order).map_err(|e| err(&e))?;
    if fam.tilde_l != expected {
        return Err(format!("L~ = {} differs from σ(x∇) image {expected}", fam.tilde_l));
    }

    let inverse = exp_ad(&p_op.scale(&-Rational::one()), &build(&OpName::Lop), max_order)
        .map_err(|e| err(&e))?;
    let inverse = match spec.kind {
        FamilyKind::CharlierAppell => inverse,
        FamilyKind::MeixnerType => inverse.scale(&claimed_slope(spec)),
    };
    let probe = PolyFamily {
        tilde_l: inverse.clone(),
        eigenvalues: Vec::new(),
        ..fam.clone()
    };
    if let Err(FamilyError::NotEigenfunction { n, .. }) = eigencheck(&probe) {
        ledger.erratum(
            "erratum:inverse-conjugation",
            format!(
                "the operator built with e^{{−ad P}}, {inverse}, fails the eigen-equation at \
                 n={n}; the bispectral operator is the e^{{+ad P}} image of x∇"
            ),
        );
    }
    if let Some(false) = reports.iter().find_map(|r| r.opposite_sign_matches) {
        ledger.erratum(
            "erratum:meixner-sign",
            "σ(x) = x + R·P'(G) + P''(G)·G + P'(G)²·G with [G, R] = 2G; \
             the opposite-sign form x + R·P'(G) − P''(G)·G − P'(G)²·G does not match",
        );
    }
    Ok(format!(
        "closed forms match series ({}); intertwining holds for n <= {}; L~ = σ(x∇)",
        orders.join(", "),
        limit - 1
    ))
}

fn check_degeneracy(fam: &PolyFamily, ledger: &mut VerificationLedger) {
    let name = CheckName::Degeneracy.as_str();
    let table = match recursion_table(fam) {
        Ok(t) => t,
        Err(e) => return ledger.fail(name, e.to_string()),
    };
    let scan = degeneracy_scan(&table);
    ledger.constant("degeneracy_indices", json!(scan.zeros));
    let Some(&(n0, j)) = scan.zeros.first() else {
        let mut details = format!("no vanishing γ_{}(n) for n < {}", scan.depth, fam.nmax());
        if let Some(w) = &scan.warning {
            details.push_str(&format!(" ({w})"));
        }
        return ledger.pass(name, details);
    };
    let ns: Vec<String> = scan.zeros.iter().map(|(n, _)| n.to_string()).collect();
    match maroni_check(&fam.truncated(n0), scan.depth) {
        Ok(r) => ledger.pass(
            name,
            format!(
                "γ_{j}(n) = 0 at n = {}; orthogonality holds on P_0..P_{n0} \
                 ({} vanishing, {} non-vanishing conditions)",
                ns.join(", "),
                r.vanishing_checked,
                r.nonvanishing_checked
            ),
        ),
        Err(e) => ledger.fail(
            name,
            format!("γ_{j}(n) = 0 at n = {}; truncated check: {e}", ns.join(", ")),
        ),
    }
}

/// Compares the engine against the classical Charlier polynomials and operator.
pub fn classical_charlier_suite(
    a: &Rational,
    nmax: usize,
    max_order: usize,
) -> Result<(FamilySpec, VerificationLedger), FamilyError> {
    let p = crate::autom::ModifierPoly::new(vec![-a.clone()])?;
    let spec = FamilySpec::charlier_appell(p, nmax);
    let fam = generate_with(&spec, max_order)?;
    let mut ledger = VerificationLedger::new();
    let mut mismatch = None;
    for (n, member) in fam.members.iter().enumerate() {
        if classical_charlier(a, n)? != *member {
            mismatch = Some(n);
            break;
        }
    }
    match mismatch {
        None => ledger.pass(
            "classical/members",
            format!("P_n = (−a)^n C_n(x; a) for 0 <= n <= {nmax}"),
        ),
        Some(n) => ledger.fail(
            "classical/members",
            format!("first mismatch at n={n}: engine {}", fam.members[n]),
        ),
    }
    let op = charlier_operator(a);
    if fam.tilde_l == op {
        ledger.pass("classical/operator", format!("L~ = aΔ + x∇ = {op}"));
    } else {
        ledger.fail(
            "classical/operator",
            format!("L~ = {} differs from aΔ + x∇ = {op}", fam.tilde_l),
        );
    }
    ledger.constant("eigenvalue_slope", format_rational(&fam.eigenvalues.get(1).cloned().unwrap_or_else(Rational::zero)));
    Ok((spec, ledger))
}

/// Runs the `P(G) = αG` specialisation at `α = c/(1 − c)` and compares it with the
/// classical Meixner operator and polynomials.
pub fn classical_meixner_suite(
    beta: &Rational,
    c: &Rational,
    nmax: usize,
) -> Result<(FamilySpec, VerificationLedger), FamilyError> {
    let sp = meixner_specialization(beta, c, nmax)?;
    let spec = FamilySpec::meixner_type(
        crate::autom::ModifierPoly::new(vec![sp.alpha.clone()])?,
        beta.clone(),
        c.clone(),
        nmax,
    )?;
    let mut ledger = VerificationLedger::new();
    ledger.constant("alpha", format_rational(&sp.alpha));
    match &sp.ratio_to_requested {
        Some(s) => {
            ledger.pass(
                "classical/operator",
                format!("L~ = {} · [c(x+β)Δ + x∇]", format_rational(s)),
            );
            ledger.constant("proportionality_scalar", format_rational(s));
        }
        None => {
            if let Some(fit) = &sp.fit {
                ledger.constant("proportionality_scalar", format_rational(&fit.scale));
                ledger.constant("fitted_beta", format_rational(&fit.beta));
                ledger.constant("fitted_c", format_rational(&fit.c));
                ledger.pass(
                    "classical/operator",
                    format!(
                        "L~ = {} = {} · [c'(x+β')Δ + x∇] with β' = {}, c' = {}",
                        sp.tilde_l,
                        format_rational(&fit.scale),
                        format_rational(&fit.beta),
                        format_rational(&fit.c)
                    ),
                );
                ledger.erratum(
                    "erratum:meixner-specialization",
                    format!(
                        "α = c/(1−c) does not give a multiple of c(x+β)Δ + x∇ at β = {}, c = {}{}",
                        format_rational(beta),
                        format_rational(c),
                        if sp.negated_alpha_is_shifted_meixner {
                            "; α = −c/(1−c) gives c(x+β+1)Δ + x∇ exactly"
                        } else {
                            ""
                        }
                    ),
                );
            } else {
                ledger.fail(
                    "classical/operator",
                    format!("L~ = {} is not of the form s·[c(x+β)Δ + x∇]", sp.tilde_l),
                );
            }
        }
    }
    match sp.first_mismatch {
        None => ledger.pass(
            "classical/members",
            format!("members equal the monic Meixner polynomials of L~ for 0 <= n <= {nmax}"),
        ),
        Some(n) => ledger.fail("classical/members", format!("first mismatch at n={n}")),
    }
    Ok((spec, ledger))
}
