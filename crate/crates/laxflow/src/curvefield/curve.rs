//! Base curves, places, and local chart series.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LaxError, Result};
use crate::poly::Poly;
use crate::series::{compose_poly, Series};
use crate::Tol;

/// A base curve: the rational line or a hyperelliptic curve `y² = f(x)`.
#[derive(Debug, Clone)]
pub enum BaseCurve {
    RationalLine,
    Hyperelliptic { f: Poly, genus: usize },
}

impl BaseCurve {
    pub fn rational_line() -> Arc<BaseCurve> {
        Arc::new(BaseCurve::RationalLine)
    }

    /// Construct `y² = f(x)`. Rejects non-squarefree `f` and degree < 3.
    pub fn hyperelliptic(f: Poly, tol: &Tol) -> Result<Arc<BaseCurve>> {
        let deg = f.degree();
        if deg < 3 {
            return Err(LaxError::BadCurve(format!("degree {deg} < 3")));
        }
        if !f.is_squarefree(tol.place) {
            return Err(LaxError::BadCurve("repeated roots".into()));
        }
        let genus = ((deg as usize) - 1) / 2;
        Ok(Arc::new(BaseCurve::Hyperelliptic { f, genus }))
    }

    pub fn genus(&self) -> usize {
        match self {
            BaseCurve::RationalLine => 0,
            BaseCurve::Hyperelliptic { genus, .. } => *genus,
        }
    }

    pub fn f(&self) -> Option<&Poly> {
        match self {
            BaseCurve::RationalLine => None,
            BaseCurve::Hyperelliptic { f, .. } => Some(f),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, BaseCurve::RationalLine)
    }

    /// Odd-degree models have one (ramified) place over `x = ∞`, even-degree
    /// models have two.
    pub fn infinite_places(&self) -> Vec<Place> {
        match self {
            BaseCurve::RationalLine => vec![Place::infinity(0)],
            BaseCurve::Hyperelliptic { f, .. } => {
                if f.degree() % 2 == 1 {
                    vec![Place::infinity(0)]
                } else {
                    vec![Place::infinity(0), Place::infinity(1)]
                }
            }
        }
    }

    /// Places above `x = x0`: one branch place when `f(x0) ≈ 0`, otherwise
    /// the two sheets `(x0, ±y0)` (one place on the rational line).
    pub fn places_over(&self, x0: Complex64, tol: &Tol) -> Vec<Place> {
        match self {
            BaseCurve::RationalLine => vec![Place::finite_regular(x0, Complex64::default())],
            BaseCurve::Hyperelliptic { f, .. } => {
                let fx = f.eval(x0);
                let scale = f.max_abs() * (1.0 + x0.norm()).powi(f.degree() as i32);
                if fx.norm() <= tol.place * scale.max(1.0) {
                    vec![Place::finite_branch(x0)]
                } else {
                    let y0 = fx.sqrt();
                    vec![Place::finite_regular(x0, y0), Place::finite_regular(x0, -y0)]
                }
            }
        }
    }

    /// Structural identity of curves, used to gate mixed-curve arithmetic.
    pub fn same_curve(a: &Arc<BaseCurve>, b: &Arc<BaseCurve>) -> bool {
        if Arc::ptr_eq(a, b) {
            return true;
        }
        match (a.as_ref(), b.as_ref()) {
            (BaseCurve::RationalLine, BaseCurve::RationalLine) => true,
            (BaseCurve::Hyperelliptic { f: fa, .. }, BaseCurve::Hyperelliptic { f: fb, .. }) => {
                if fa.degree() != fb.degree() {
                    return false;
                }
                let scale = fa.max_abs().max(fb.max_abs()).max(1.0);
                fa.coeffs()
                    .iter()
                    .zip(fb.coeffs())
                    .all(|(x, y)| (x - y).norm() <= 1e-12 * scale)
            }
            _ => false,
        }
    }

    /// Local chart data at `p` with `rel` known series terms.
    ///
    /// Returns `x(w)`, `y(w)` (absent on the rational line) and `dx/dw`.
    pub fn chart(&self, p: &Place, rel: i32) -> Result<ChartSeries> {
        let rel = rel.max(4);
        match (self, &p.chart) {
            (BaseCurve::RationalLine, Chart::FiniteRegular { x, .. }) => {
                let xs = finite_linear(*x, rel);
                Ok(ChartSeries {
                    x: xs,
                    y: None,
                    dx_dw: Series::monomial(Complex64::new(1.0, 0.0), 0, rel),
                })
            }
            (BaseCurve::RationalLine, Chart::Infinity { .. }) => Ok(ChartSeries {
                x: Series::monomial(Complex64::new(1.0, 0.0), -1, rel - 1),
                y: None,
                dx_dw: Series::monomial(Complex64::new(-1.0, 0.0), -2, rel - 2),
            }),
            (BaseCurve::RationalLine, Chart::FiniteBranch { .. }) => {
                Err(LaxError::BadPlace("branch place on the rational line".into()))
            }
            (BaseCurve::Hyperelliptic { f, .. }, Chart::FiniteRegular { x, y }) => {
                if y.norm() == 0.0 {
                    return Err(LaxError::BadPlace(format!("({x}, 0) is a branch point")));
                }
                let xs = finite_linear(*x, rel);
                let fx = compose_poly(f, &xs);
                let mut ys = fx.sqrt().ok_or_else(|| {
                    LaxError::BadPlace(format!("f has a zero of odd order at {x}"))
                })?;
                // Pick the sheet matching the stored y0.
                if (ys.coeff(0) - y).norm() > (ys.coeff(0) + y).norm() {
                    ys = ys.neg();
                }
                Ok(ChartSeries {
                    x: xs,
                    y: Some(ys),
                    dx_dw: Series::monomial(Complex64::new(1.0, 0.0), 0, rel),
                })
            }
            (BaseCurve::Hyperelliptic { f, .. }, Chart::FiniteBranch { x }) => {
                branch_chart(f, *x, rel)
            }
            (BaseCurve::Hyperelliptic { f, .. }, Chart::Infinity { sheet }) => {
                let deg = f.degree() as i32;
                if deg % 2 == 1 {
                    // Single ramified place, x = w^{-2}.
                    let xs = Series::monomial(Complex64::new(1.0, 0.0), -2, rel - 2);
                    let fw = laurent_poly_eval(f, -2, rel);
                    let ys = fw
                        .sqrt()
                        .ok_or_else(|| LaxError::BadPlace("odd valuation at infinity".into()))?;
                    Ok(ChartSeries {
                        x: xs,
                        y: Some(ys),
                        dx_dw: Series::monomial(Complex64::new(-2.0, 0.0), -3, rel - 3),
                    })
                } else {
                    // Two unramified places, x = w^{-1}; sheet = sign of y·x^{-(g+1)}.
                    let xs = Series::monomial(Complex64::new(1.0, 0.0), -1, rel - 1);
                    let fw = laurent_poly_eval(f, -1, rel);
                    let mut ys = fw
                        .sqrt()
                        .ok_or_else(|| LaxError::BadPlace("odd valuation at infinity".into()))?;
                    if *sheet == 1 {
                        ys = ys.neg();
                    }
                    Ok(ChartSeries {
                        x: xs,
                        y: Some(ys),
                        dx_dw: Series::monomial(Complex64::new(-1.0, 0.0), -2, rel - 2),
                    })
                }
            }
        }
    }
}

/// `x = x0 + w` as a series.
fn finite_linear(x0: Complex64, rel: i32) -> Series {
    let mut coeffs = vec![Complex64::default(); rel as usize];
    coeffs[0] = x0;
    if rel > 1 {
        coeffs[1] = Complex64::new(1.0, 0.0);
    }
    Series::new(0, rel, coeffs)
}

/// Evaluate `f(w^e)` for a negative exponent `e` as a finite Laurent series.
fn laurent_poly_eval(f: &Poly, e: i32, rel: i32) -> Series {
    let deg = f.degree() as i32;
    let val = e * deg;
    let prec = val + rel;
    let mut s = Series::zero(prec);
    for (k, &c) in f.coeffs().iter().enumerate() {
        s = s.add(&Series::monomial(c, e * k as i32, prec));
    }
    s
}

/// Chart at a branch point: `w = y`, `x(w)` from Newton inversion of
/// `f(x0 + u) = w²`.
fn branch_chart(f: &Poly, x0: Complex64, rel: i32) -> Result<ChartSeries> {
    let prec = rel.max(6);
    // Shifted polynomial g(u) = f(x0 + u).
    let g = taylor_shift(f, x0);
    let g1 = g.coeff(1);
    if g1.norm() < 1e-12 * f.max_abs().max(1.0) {
        return Err(LaxError::BadPlace(format!(
            "f'({x0}) vanishes: not a simple branch point"
        )));
    }
    let w2 = Series::monomial(Complex64::new(1.0, 0.0), 2, prec + 2);
    let mut u = w2.scale(g1.inv());
    let gp = g.derivative();
    for _ in 0..((prec as f64).log2().ceil() as usize + 3) {
        let gu = compose_poly(&g, &u).truncate(prec + 2);
        let gpu = compose_poly(&gp, &u).truncate(prec + 2);
        let err = gu.sub(&w2);
        let step = err.div(&gpu).ok_or_else(|| {
            LaxError::ExpansionFailure("branch chart Newton division failed".into())
        })?;
        u = u.sub(&step).truncate(prec + 2);
    }
    let x = u.add(&Series::constant(x0, prec));
    Ok(ChartSeries {
        dx_dw: x.derivative(),
        x,
        y: Some(Series::monomial(Complex64::new(1.0, 0.0), 1, prec)),
    })
}

/// Taylor shift: coefficients of `f(x0 + u)` in `u`.
fn taylor_shift(f: &Poly, x0: Complex64) -> Poly {
    let mut out = Poly::zero();
    let shift = Poly::new(vec![x0, Complex64::new(1.0, 0.0)]);
    let mut pow = Poly::one();
    for &c in f.coeffs() {
        out = &out + &pow.scale(c);
        pow = &pow * &shift;
    }
    out
}

/// A point of the curve in one of three chart types.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    FiniteRegular { x: Complex64, y: Complex64 },
    FiniteBranch { x: Complex64 },
    Infinity { sheet: u8 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub chart: Chart,
}

impl Place {
    pub fn finite_regular(x: Complex64, y: Complex64) -> Place {
        Place { chart: Chart::FiniteRegular { x, y } }
    }

    pub fn finite_branch(x: Complex64) -> Place {
        Place { chart: Chart::FiniteBranch { x } }
    }

    pub fn infinity(sheet: u8) -> Place {
        Place { chart: Chart::Infinity { sheet } }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.chart, Chart::Infinity { .. })
    }

    /// The x-coordinate for finite places.
    pub fn x(&self) -> Option<Complex64> {
        match self.chart {
            Chart::FiniteRegular { x, .. } => Some(x),
            Chart::FiniteBranch { x } => Some(x),
            Chart::Infinity { .. } => None,
        }
    }

    /// Identity within tolerance: same chart type, coordinates within `tol.place`.
    pub fn same(&self, other: &Place, tol: &Tol) -> bool {
        match (&self.chart, &other.chart) {
            (Chart::FiniteRegular { x: xa, y: ya }, Chart::FiniteRegular { x: xb, y: yb }) => {
                (xa - xb).norm() <= tol.place && (ya - yb).norm() <= tol.place * (1.0 + ya.norm())
            }
            (Chart::FiniteBranch { x: xa }, Chart::FiniteBranch { x: xb }) => {
                (xa - xb).norm() <= tol.place
            }
            (Chart::Infinity { sheet: a }, Chart::Infinity { sheet: b }) => a == b,
            _ => false,
        }
    }

    /// Ramification index of the x-coordinate map at this place.
    pub fn ram_index(&self, curve: &BaseCurve) -> i32 {
        match (&self.chart, curve) {
            (Chart::FiniteBranch { .. }, _) => 2,
            (Chart::Infinity { .. }, BaseCurve::Hyperelliptic { f, .. }) => {
                if f.degree() % 2 == 1 {
                    2
                } else {
                    1
                }
            }
            _ => 1,
        }
    }
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.chart {
            Chart::FiniteRegular { x, y } => write!(f, "({:.6}{:+.6}i, {:.6}{:+.6}i)", x.re, x.im, y.re, y.im),
            Chart::FiniteBranch { x } => write!(f, "branch({:.6}{:+.6}i)", x.re, x.im),
            Chart::Infinity { sheet } => write!(f, "infinity[{sheet}]"),
        }
    }
}

/// Local series data of a chart.
#[derive(Debug, Clone)]
pub struct ChartSeries {
    pub x: Series,
    pub y: Option<Series>,
    pub dx_dw: Series,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cr;
    use approx::assert_abs_diff_eq;

    #[test]
    fn branch_chart_inverts_x_of_w() {
        // y² = x³ − x at the branch point x0 = 0: x = −w² − w⁶ − 3w¹⁰ + …
        let tol = Tol::default();
        let f = Poly::new(vec![cr(0.0), cr(-1.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        let p = Place::finite_branch(cr(0.0));
        let cs = curve.chart(&p, 12).unwrap();
        assert_abs_diff_eq!((cs.x.coeff(2) - cr(-1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cs.x.coeff(4).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((cs.x.coeff(6) - cr(-1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((cs.x.coeff(10) - cr(-3.0)).norm(), 0.0, epsilon = 1e-11);
        // Consistency: f(x(w)) = w².
        let fx = compose_poly(curve.f().unwrap(), &cs.x);
        assert_abs_diff_eq!((fx.coeff(2) - cr(1.0)).norm(), 0.0, epsilon = 1e-12);
        for k in 3..fx.prec().min(10) {
            assert_abs_diff_eq!(fx.coeff(k).norm(), 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn infinity_chart_odd_degree() {
        // y² = x⁵ + 1: at infinity x = w⁻², y = w⁻⁵·sqrt(1 + w¹⁰).
        let tol = Tol::default();
        let f = Poly::new(vec![cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        let cs = curve.chart(&Place::infinity(0), 14).unwrap();
        let y = cs.y.unwrap();
        assert_eq!(y.normalized().val(), -5);
        assert_abs_diff_eq!((y.coeff(-5) - cr(1.0)).norm(), 0.0, epsilon = 1e-12);
        // y² must reproduce f(x): w^{-10} + 1.
        let y2 = y.mul(&y);
        assert_abs_diff_eq!((y2.coeff(-10) - cr(1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((y2.coeff(0) - cr(1.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn infinity_chart_even_degree_two_sheets() {
        let tol = Tol::default();
        // y² = x⁶ + 2x + 3, genus 2, two infinite places.
        let f = Poly::new(vec![cr(3.0), cr(2.0), cr(0.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        assert_eq!(curve.infinite_places().len(), 2);
        let c0 = curve.chart(&Place::infinity(0), 10).unwrap();
        let c1 = curve.chart(&Place::infinity(1), 10).unwrap();
        let y0 = c0.y.unwrap();
        let y1 = c1.y.unwrap();
        assert_eq!(y0.normalized().val(), -3);
        assert_abs_diff_eq!((y0.coeff(-3) + y1.coeff(-3)).norm(), 0.0, epsilon = 1e-12);
    }
}
