//! Function-field elements and their canonical-form arithmetic.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LaxError, Result};
use crate::lex_cmp;
use crate::poly::Poly;
use crate::Tol;

use super::curve::{BaseCurve, Chart, Place};

/// Relative threshold for cancelling a shared denominator root.
const CANCEL_EPS: f64 = 1e-9;

/// Radius (relative to `1+|r|`) within which two denominator roots are the
/// same point.
const ROOT_MERGE: f64 = 1e-6;

/// A meromorphic function on the base curve.
///
/// On the rational line this is `a(x)/d(x)`; on a hyperelliptic curve it is
/// `(a(x) + y·b(x))/d(x)` with `y²` always reduced through the defining
/// relation. The denominator is held as a factored root multiset (monic by
/// construction): common denominators in sums are then exact multiset merges,
/// which keeps repeated poles from degrading to the half-precision accuracy a
/// polynomial root finder would give them.
#[derive(Debug, Clone)]
pub struct FieldElement {
    curve: Arc<BaseCurve>,
    a: Poly,
    b: Poly,
    den_roots: Vec<(Complex64, u32)>,
    den: Poly,
}

/// Cluster the roots of `d` into a multiset and polish each representative
/// (a root of multiplicity `m` is a simple root of the `(m−1)`-th derivative).
fn factor_multiset(d: &Poly) -> Vec<(Complex64, u32)> {
    let mut clusters: Vec<(Complex64, u32)> = Vec::new();
    for r in d.roots() {
        match clusters
            .iter_mut()
            .find(|(c, _)| (*c - r).norm() <= ROOT_MERGE * (1.0 + r.norm()))
        {
            Some((c, m)) => {
                *c = (*c * (*m as f64) + r) / ((*m + 1) as f64);
                *m += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    for (c, m) in clusters.iter_mut() {
        let mut p = d.clone();
        for _ in 1..*m {
            p = p.derivative();
        }
        let dp = p.derivative();
        for _ in 0..4 {
            let d_val = dp.eval(*c);
            if d_val.norm() < 1e-300 {
                break;
            }
            let step = p.eval(*c) / d_val;
            if step.norm() > 0.1 {
                break;
            }
            *c -= step;
        }
    }
    clusters.sort_by(|x, y| lex_cmp(x.0, y.0));
    clusters
}

fn expand_multiset(roots: &[(Complex64, u32)]) -> Poly {
    let mut p = Poly::one();
    for (r, m) in roots {
        for _ in 0..*m {
            p = &p * &Poly::new(vec![-r, Complex64::new(1.0, 0.0)]);
        }
    }
    p
}

impl FieldElement {
    pub fn new(curve: Arc<BaseCurve>, a: Poly, b: Poly, d: Poly) -> Self {
        assert!(!d.is_zero(), "zero denominator");
        if curve.is_rational() {
            assert!(b.is_zero(), "y-part on the rational line");
        }
        let lead = d.leading();
        let den_roots = factor_multiset(&d);
        FieldElement::from_factored(curve, a.scale(lead.inv()), b.scale(lead.inv()), den_roots)
    }

    fn from_factored(
        curve: Arc<BaseCurve>,
        a: Poly,
        b: Poly,
        den_roots: Vec<(Complex64, u32)>,
    ) -> Self {
        let mut e = FieldElement { curve, a, b, den_roots, den: Poly::one() };
        e.canonicalize();
        e
    }

    pub fn zero(curve: Arc<BaseCurve>) -> Self {
        FieldElement {
            curve,
            a: Poly::zero(),
            b: Poly::zero(),
            den_roots: Vec::new(),
            den: Poly::one(),
        }
    }

    pub fn one(curve: Arc<BaseCurve>) -> Self {
        FieldElement {
            curve,
            a: Poly::one(),
            b: Poly::zero(),
            den_roots: Vec::new(),
            den: Poly::one(),
        }
    }

    pub fn constant(curve: Arc<BaseCurve>, c: Complex64) -> Self {
        FieldElement {
            curve,
            a: Poly::constant(c),
            b: Poly::zero(),
            den_roots: Vec::new(),
            den: Poly::one(),
        }
    }

    /// The coordinate function `x`.
    pub fn x(curve: Arc<BaseCurve>) -> Self {
        FieldElement {
            curve,
            a: Poly::x(),
            b: Poly::zero(),
            den_roots: Vec::new(),
            den: Poly::one(),
        }
    }

    /// The function `y` (hyperelliptic only).
    pub fn y(curve: Arc<BaseCurve>) -> Self {
        assert!(!curve.is_rational(), "y on the rational line");
        FieldElement {
            curve,
            a: Poly::zero(),
            b: Poly::one(),
            den_roots: Vec::new(),
            den: Poly::one(),
        }
    }

    /// A polynomial in `x`.
    pub fn from_poly(curve: Arc<BaseCurve>, p: Poly) -> Self {
        FieldElement { curve, a: p, b: Poly::zero(), den_roots: Vec::new(), den: Poly::one() }
    }

    pub fn from_rational(curve: Arc<BaseCurve>, num: Poly, den: Poly) -> Self {
        FieldElement::new(curve, num, Poly::zero(), den)
    }

    pub fn curve(&self) -> &Arc<BaseCurve> {
        &self.curve
    }

    pub fn num_x(&self) -> &Poly {
        &self.a
    }

    pub fn num_y(&self) -> &Poly {
        &self.b
    }

    /// Monic expanded denominator.
    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn den_roots(&self) -> &[(Complex64, u32)] {
        &self.den_roots
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the element is a polynomial in `x` alone (trivial
    /// denominator, no `y`-part).
    pub fn as_polynomial(&self) -> Option<&Poly> {
        if self.b.is_zero() && self.den_roots.is_empty() {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Cancel denominator roots where both numerators vanish; rebuild the
    /// expanded denominator. Renormalizing the result is the identity.
    fn canonicalize(&mut self) {
        if self.is_zero() {
            self.den_roots.clear();
            self.den = Poly::one();
            return;
        }
        let mut kept: Vec<(Complex64, u32)> = Vec::new();
        for &(r, m) in &self.den_roots {
            let mut m = m;
            while m > 0 {
                let growth =
                    (1.0 + r.norm()).powi(self.a.degree().max(self.b.degree()).max(0) as i32);
                let scale = self.a.max_abs().max(self.b.max_abs()).max(1e-300) * growth;
                let a_ok = self.a.is_zero() || self.a.eval(r).norm() <= CANCEL_EPS * scale;
                let b_ok = self.b.is_zero() || self.b.eval(r).norm() <= CANCEL_EPS * scale;
                if a_ok && b_ok {
                    self.a = self.a.deflate(r);
                    self.b = self.b.deflate(r);
                    m -= 1;
                } else {
                    break;
                }
            }
            if m > 0 {
                kept.push((r, m));
            }
        }
        kept.sort_by(|x, y| lex_cmp(x.0, y.0));
        self.den_roots = kept;
        self.den = expand_multiset(&self.den_roots);
    }

    fn check_curve(&self, rhs: &FieldElement) -> Result<()> {
        if BaseCurve::same_curve(&self.curve, &rhs.curve) {
            Ok(())
        } else {
            Err(LaxError::CurveMismatch)
        }
    }

    /// Least common multiple of the two denominator multisets, with the
    /// complementary factors `lcm/d1` and `lcm/d2` as expanded polynomials.
    fn den_lcm(&self, rhs: &FieldElement) -> (Vec<(Complex64, u32)>, Poly, Poly) {
        let mut lcm: Vec<(Complex64, u32)> = self.den_roots.clone();
        for &(r, m) in &rhs.den_roots {
            match lcm
                .iter_mut()
                .find(|(c, _)| (*c - r).norm() <= ROOT_MERGE * (1.0 + r.norm()))
            {
                Some((_, lm)) => *lm = (*lm).max(m),
                None => lcm.push((r, m)),
            }
        }
        lcm.sort_by(|x, y| lex_cmp(x.0, y.0));
        let comp = |own: &[(Complex64, u32)]| {
            let mut c: Vec<(Complex64, u32)> = Vec::new();
            for &(r, m) in &lcm {
                let have = own
                    .iter()
                    .find(|(x, _)| (*x - r).norm() <= ROOT_MERGE * (1.0 + r.norm()))
                    .map(|(_, k)| *k)
                    .unwrap_or(0);
                if m > have {
                    c.push((r, m - have));
                }
            }
            expand_multiset(&c)
        };
        let c1 = comp(&self.den_roots);
        let c2 = comp(&rhs.den_roots);
        (lcm, c1, c2)
    }

    pub fn add(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.check_curve(rhs)?;
        let (lcm, c1, c2) = self.den_lcm(rhs);
        Ok(FieldElement::from_factored(
            self.curve.clone(),
            &(&self.a * &c1) + &(&rhs.a * &c2),
            &(&self.b * &c1) + &(&rhs.b * &c2),
            lcm,
        ))
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            curve: self.curve.clone(),
            a: -&self.a,
            b: -&self.b,
            den_roots: self.den_roots.clone(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.check_curve(rhs)?;
        // (a1 + y b1)(a2 + y b2) = a1 a2 + f b1 b2 + y (a1 b2 + a2 b1).
        let fb = match self.curve.f() {
            Some(f) => &(&self.b * &rhs.b) * f,
            None => Poly::zero(),
        };
        let mut den: Vec<(Complex64, u32)> = self.den_roots.clone();
        for &(r, m) in &rhs.den_roots {
            match den
                .iter_mut()
                .find(|(c, _)| (*c - r).norm() <= ROOT_MERGE * (1.0 + r.norm()))
            {
                Some((_, dm)) => *dm += m,
                None => den.push((r, m)),
            }
        }
        Ok(FieldElement::from_factored(
            self.curve.clone(),
            &(&self.a * &rhs.a) + &fb,
            &(&self.a * &rhs.b) + &(&self.b * &rhs.a),
            den,
        ))
    }

    pub fn scale(&self, s: Complex64) -> FieldElement {
        FieldElement {
            curve: self.curve.clone(),
            a: self.a.scale(s),
            b: self.b.scale(s),
            den_roots: self.den_roots.clone(),
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse via the conjugate: `1/(a+yb) = (a−yb)/(a²−f·b²)`.
    pub fn recip(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(LaxError::DivisionByZero);
        }
        match self.curve.f() {
            None => Ok(FieldElement::new(
                self.curve.clone(),
                self.den.clone(),
                Poly::zero(),
                self.a.clone(),
            )),
            Some(f) => {
                let norm = &(&self.a * &self.a) - &(&(&self.b * &self.b) * f);
                if norm.is_zero() {
                    return Err(LaxError::DivisionByZero);
                }
                Ok(FieldElement::new(
                    self.curve.clone(),
                    &self.den * &self.a,
                    (&self.den * &self.b).scale(Complex64::new(-1.0, 0.0)),
                    norm,
                ))
            }
        }
    }

    pub fn div(&self, rhs: &FieldElement) -> Result<FieldElement> {
        self.mul(&rhs.recip()?)
    }

    pub fn powi(&self, n: u32) -> Result<FieldElement> {
        let mut acc = FieldElement::one(self.curve.clone());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Evaluate at a place where the element is regular (order-0 Laurent
    /// coefficient). Errors when a pole sits at the place.
    pub fn eval_at(&self, p: &Place, tol: &Tol) -> Result<Complex64> {
        // Fast path at finite regular points with nonvanishing denominator.
        if let Chart::FiniteRegular { x, y } = p.chart {
            let dx = self.den.eval(x);
            let growth = (1.0 + x.norm()).powi(self.den.degree().max(0) as i32);
            if dx.norm() > 1e-8 * growth {
                return Ok((self.a.eval(x) + y * self.b.eval(x)) / dx);
            }
        }
        let series = super::expand::expand_series(self, p, 1)?;
        if let Some(v) = series.true_val() {
            if v < 0 {
                let mag: f64 = (v..0).map(|k| series.coeff(k).norm()).sum();
                if mag > tol.eq * series.head_scale().max(1e-300) {
                    return Err(LaxError::PoleAtEvaluation);
                }
            }
        }
        Ok(series.coeff(0))
    }

    /// Max coefficient magnitude across numerator and denominator; a cheap
    /// scale for relative comparisons.
    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.b.max_abs()).max(self.den.max_abs())
    }

    /// Coefficient-wise distance between canonical forms.
    pub fn distance(&self, rhs: &FieldElement) -> Result<f64> {
        let diff = self.sub(rhs)?;
        if diff.is_zero() {
            return Ok(0.0);
        }
        Ok(diff.a.max_abs().max(diff.b.max_abs()) / diff.den.max_abs().max(1e-300))
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}", self.a)?;
        if !self.b.is_zero() {
            write!(f, " + y*({})", self.b)?;
        }
        write!(f, ") / ({})", self.den)
    }
}

/// Binary operation selector for [`ff_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Field arithmetic entry point: canonical-form result of `a op b`.
pub fn ff_arith(a: &FieldElement, b: &FieldElement, op: FfOp) -> Result<FieldElement> {
    match op {
        FfOp::Add => a.add(b),
        FfOp::Sub => a.sub(b),
        FfOp::Mul => a.mul(b),
        FfOp::Div => a.div(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cr;
    use approx::assert_abs_diff_eq;

    fn mumford_curve() -> Arc<BaseCurve> {
        // y² = x³ − x
        BaseCurve::hyperelliptic(
            Poly::new(vec![cr(0.0), cr(-1.0), cr(0.0), cr(1.0)]),
            &Tol::default(),
        )
        .unwrap()
    }

    #[test]
    fn y_squared_reduces_to_f() {
        let c = mumford_curve();
        let y = FieldElement::y(c.clone());
        let y2 = y.mul(&y).unwrap();
        assert!(y2.num_y().is_zero());
        assert_eq!(y2.den().degree(), 0);
        // x³ − x
        assert_abs_diff_eq!((y2.num_x().coeff(3) - cr(1.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((y2.num_x().coeff(1) + cr(1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rational_partial_fractions() {
        // 1/(x−1) + 1/(x+1) = 2x/(x²−1)
        let c = BaseCurve::rational_line();
        let one = Poly::one();
        let e1 =
            FieldElement::from_rational(c.clone(), one.clone(), Poly::new(vec![cr(-1.0), cr(1.0)]));
        let e2 = FieldElement::from_rational(c.clone(), one, Poly::new(vec![cr(1.0), cr(1.0)]));
        let s = ff_arith(&e1, &e2, FfOp::Add).unwrap();
        assert_abs_diff_eq!((s.num_x().coeff(1) - cr(2.0)).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(s.den().degree(), 2);
        assert_abs_diff_eq!((s.den().coeff(0) + cr(1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn repeated_addition_keeps_pole_accuracy() {
        // Summing many elements over the same denominator must not degrade
        // the pole locations (the double-root trap).
        let c = BaseCurve::rational_line();
        let r = cr(0.7);
        let den = Poly::new(vec![-r, cr(1.0)]);
        let e = FieldElement::from_rational(c.clone(), Poly::one(), den);
        let mut acc = FieldElement::zero(c);
        for _ in 0..10 {
            acc = acc.add(&e).unwrap();
        }
        assert_eq!(acc.den().degree(), 1);
        assert_abs_diff_eq!((acc.den().coeff(0) + r).norm(), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!((acc.num_x().coeff(0) - cr(10.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn y_over_x_squared_on_genus_two() {
        // (y/x)² on y² = x⁵ + 1 → (x⁵+1)/x².
        let c = BaseCurve::hyperelliptic(
            Poly::new(vec![cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]),
            &Tol::default(),
        )
        .unwrap();
        let e = FieldElement::new(c.clone(), Poly::zero(), Poly::one(), Poly::x());
        let sq = e.mul(&e).unwrap();
        assert!(sq.num_y().is_zero());
        assert_eq!(sq.num_x().degree(), 5);
        assert_eq!(sq.den().degree(), 2);
        assert_abs_diff_eq!((sq.num_x().coeff(0) - cr(1.0)).norm(), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!((sq.num_x().coeff(5) - cr(1.0)).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn division_round_trips() {
        let c = mumford_curve();
        let e = FieldElement::new(
            c.clone(),
            Poly::new(vec![cr(1.0), cr(2.0)]),
            Poly::new(vec![cr(0.5), cr(0.0), cr(1.0)]),
            Poly::new(vec![cr(-2.0), cr(0.0), cr(1.0)]),
        );
        let r = e.recip().unwrap();
        let p = e.mul(&r).unwrap();
        let one = FieldElement::one(c);
        assert!(p.distance(&one).unwrap() < 1e-10);
    }

    #[test]
    fn canonical_form_idempotent_and_cancelling() {
        let c = BaseCurve::rational_line();
        // (x²−1)/(x−1) should reduce to x+1.
        let e = FieldElement::from_rational(
            c,
            Poly::new(vec![cr(-1.0), cr(0.0), cr(1.0)]),
            Poly::new(vec![cr(-1.0), cr(1.0)]),
        );
        assert_eq!(e.num_x().degree(), 1);
        assert_eq!(e.den().degree(), 0);
        let renorm = FieldElement::new(
            e.curve().clone(),
            e.num_x().clone(),
            e.num_y().clone(),
            e.den().clone(),
        );
        assert!(e.distance(&renorm).unwrap() < 1e-13);
    }

    #[test]
    fn zero_division_rejected() {
        let c = BaseCurve::rational_line();
        let z = FieldElement::zero(c.clone());
        let one = FieldElement::one(c);
        assert!(matches!(one.div(&z), Err(LaxError::DivisionByZero)));
    }
}
