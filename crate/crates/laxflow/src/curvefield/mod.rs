//! Arithmetic and local analysis on base curves.
//!
//! The two supported base curves are the rational line (function field ℂ(x))
//! and hyperelliptic curves `y² = f(x)` with `f` squarefree of degree `2g+1`
//! or `2g+2`. Everything downstream — Lax matrices, spectral curves, residue
//! sections — reduces to four capabilities provided here:
//!
//! * exact rational arithmetic in the function field ([`FieldElement`]),
//! * Laurent expansion at a [`Place`] in a fixed local-coordinate convention,
//! * residues of differentials `e·dx`,
//! * Riemann-Roch spaces `L(D)` for a [`Divisor`] `D` ([`rr_basis`]).
//!
//! Local coordinates: at a finite non-branch point `w = x − x₀`; at a branch
//! point `w = y` (with `x(w)` recovered by series inversion of `w² = f(x)`);
//! at infinity `w = 1/x`, except over an odd-degree `f` where the single
//! infinite place is ramified and `x = w⁻²`.

mod curve;
mod divisor;
mod element;
mod expand;
pub mod json;
mod rr;

pub use curve::{BaseCurve, Chart, ChartSeries, Place};
pub use divisor::{canonical_divisor, Divisor};
pub use element::{ff_arith, FfOp, FieldElement};
pub use expand::{
    eval_poly_series, expand_series, laurent_expand, pole_candidates, residue_at, residue_sum,
    tail_at, valuation, zero_divisor, LaurentTail,
};
pub use rr::rr_basis;
