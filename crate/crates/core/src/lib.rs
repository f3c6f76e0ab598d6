//! Exact construction and verification of discrete vector orthogonal polynomial
//! families obtained from automorphisms of difference-operator algebras.
//!
//! * [`polyalg`]: rationals, polynomials, falling-factorial basis
//! * [`diffop`]: normal-form difference operators `Σ p_k(x) D^k`
//! * [`autom`]: `e^{ad_P}` on operators and `e^P` on polynomials
//! * [`families`]: Charlier-Appell and Meixner-type families, eigen and lowering checks
//! * [`vorth`]: recursion extraction, band structure, dual functionals
//! * [`cli`]: the `vopkit` command-line driver

pub mod autom;
pub mod cli;
pub mod diffop;
pub mod families;
pub mod polyalg;
pub mod vorth;

pub use autom::{exp_ad, exp_apply, ModifierPoly};
pub use diffop::{build, DiffOp, OpName};
pub use families::{generate, FamilyKind, FamilySpec, PolyFamily};
pub use polyalg::{int, rat, FallingCoeffs, Poly, Rational};
