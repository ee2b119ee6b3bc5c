//! Numerical Lax flows on spaces of Krichever-Lax matrices.
//!
//! The library realizes the isospectral dynamics `dL/dt = [M, L]` for
//! matrix-valued meromorphic functions on a base curve (the rational line or a
//! hyperelliptic curve `y² = f(x)`), together with the cohomological invariants
//! that detect whether such a flow is constant or linear on the Jacobian of its
//! spectral curve:
//!
//! * [`curvefield`] — arithmetic and local analysis on the base curve: places,
//!   divisors, Laurent expansions, residues, Riemann-Roch spaces.
//! * [`laxmat`] — Krichever-Lax matrices: Tyurin constraint validation,
//!   construction from Krichever-Tyurin parameters, gauge action, Hitchin
//!   invariants.
//! * [`spectral`] — the spectral curve `det(μI − L(p)) = 0`, fiber lifting,
//!   left eigenvectors, the eigenvector divisor.
//! * [`flow`] — M-ansatz construction, tangency checks and time integration in
//!   both the fixed-pole (rational line) and moving-pole (higher genus) regimes.
//! * [`residue`] — residue sections (Laurent tails of the scalar λ with
//!   `ψM + dψ/dt = λψ`), the connecting map as a residue pairing, and
//!   constancy / linearity / equivalence verdicts.
//! * [`jacobian`] — numerical period matrices and Abel-Jacobi maps on
//!   hyperelliptic spectral curves; the ground truth for straight-line flows.
//! * [`hamiltonian`] — residue Hamiltonians, conservation and flow commutation.
//! * [`scenario`] — JSON-driven pipeline orchestration backing the CLI.

pub mod curvefield;
pub mod error;
pub mod flow;
pub mod hamiltonian;
pub mod jacobian;
pub mod laxmat;
pub mod poly;
pub mod residue;
pub mod scenario;
pub mod series;
pub mod spectral;

pub use error::{LaxError, Result};

use num_complex::Complex64;

/// Tolerance context threaded through every operation that compares floats.
///
/// No operation reads a hidden global; callers that need tighter or looser
/// comparisons pass their own instance.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    /// General equality comparisons.
    pub eq: f64,
    /// Place identity: chart coordinates closer than this are the same place.
    pub place: f64,
    /// Relative rank cutoff for numerical nullspaces and least squares.
    pub rank: f64,
    /// Residue-theorem and pairing sums.
    pub residue: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            eq: 1e-9,
            place: 1e-8,
            rank: 1e-8,
            residue: 1e-10,
        }
    }
}

/// Stable total order on complex numbers: by real part, then imaginary.
///
/// Used wherever a deterministic enumeration of roots or places is required.
pub fn lex_cmp(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
}
