//! Laurent expansion, valuations and residues of function-field elements.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{LaxError, Result};
use crate::poly::Poly;
use crate::series::Series;
use crate::Tol;

use super::curve::Place;
use super::element::FieldElement;

/// The negative part of a Laurent expansion at one place.
///
/// `coefficients[k]` for `k < 0` is the coefficient of `w^k` in the place's
/// local coordinate; the recorded `order_bound` is the `N` with `-N <= k`.
#[derive(Debug, Clone)]
pub struct LaurentTail {
    pub place: Place,
    pub coefficients: BTreeMap<i32, Complex64>,
    pub order_bound: i32,
}

impl LaurentTail {
    pub fn zero(place: Place, order_bound: i32) -> Self {
        LaurentTail { place, coefficients: BTreeMap::new(), order_bound }
    }

    pub fn coeff(&self, k: i32) -> Complex64 {
        self.coefficients.get(&k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coefficients.values().all(|c| c.norm() <= tol)
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Dense coefficient vector over orders `-order_bound ..= -1`.
    pub fn dense(&self, order_bound: i32) -> Vec<Complex64> {
        (-order_bound..0).map(|k| self.coeff(k)).collect()
    }
}

/// Evaluate a polynomial on a Laurent-series argument (general Horner; the
/// argument may have negative valuation, precision shrinks accordingly).
pub fn eval_poly_series(p: &Poly, arg: &Series) -> Series {
    if p.is_zero() {
        return Series::zero(1 << 20);
    }
    let rel = arg.prec() - arg.val();
    let mut acc = Series::zero(arg.val() + rel);
    for &c in p.coeffs().iter().rev() {
        acc = acc.mul(arg).add(&Series::constant(c, acc.prec().min(arg.prec())));
    }
    acc
}

/// Full local series of `e` at `p`, normalized, with at least `rel` known
/// terms past the leading one. Retries with wider windows when division
/// consumes precision.
pub fn expand_series(e: &FieldElement, p: &Place, rel: i32) -> Result<Series> {
    let curve = e.curve();
    let deg_sum = (e.num_x().degree().max(0)
        + e.num_y().degree().max(0)
        + e.den().degree().max(0)) as i32;
    let mut slack = 4 * deg_sum + 16;
    for _ in 0..4 {
        let prec = rel + slack;
        let chart = curve.chart(p, prec)?;
        let num_a = eval_poly_series(e.num_x(), &chart.x);
        let num = match (&chart.y, e.num_y().is_zero()) {
            (_, true) => num_a,
            (Some(y), false) => num_a.add(&eval_poly_series(e.num_y(), &chart.x).mul(y)),
            (None, false) => {
                return Err(LaxError::BadPlace("y-part on the rational line".into()))
            }
        };
        let den = eval_poly_series(e.den(), &chart.x);
        let q = num
            .div(&den)
            .ok_or_else(|| LaxError::ExpansionFailure("denominator vanishes identically".into()))?;
        let q = q.normalized();
        if q.prec() - q.val() >= rel || (q.prec() >= rel && q.val() >= q.prec()) {
            return Ok(q);
        }
        slack *= 2;
    }
    Err(LaxError::ExpansionFailure(format!("window did not stabilize at {p}")))
}

/// Coefficients of `w^k` for `lo <= k <= hi` of `e` at `p`.
///
/// Requesting orders below the element's pole order simply yields zeros.
pub fn laurent_expand(e: &FieldElement, p: &Place, lo: i32, hi: i32) -> Result<Vec<Complex64>> {
    assert!(lo <= hi, "empty expansion window");
    if e.is_zero() {
        return Ok(vec![Complex64::default(); (hi - lo + 1) as usize]);
    }
    let s = expand_series(e, p, 4)?;
    let needed = hi + 1 - s.val();
    let s = if s.prec() <= hi { expand_series(e, p, needed.max(4))? } else { s };
    if s.prec() <= hi {
        return Err(LaxError::ExpansionFailure(format!(
            "could not reach order {hi} at {p}"
        )));
    }
    Ok((lo..=hi).map(|k| if k < s.val() { Complex64::default() } else { s.coeff(k) }).collect())
}

/// The negative part of the expansion at `p`, down from the true pole order.
pub fn tail_at(e: &FieldElement, p: &Place, tol: &Tol) -> Result<LaurentTail> {
    if e.is_zero() {
        return Ok(LaurentTail::zero(p.clone(), 0));
    }
    let s = expand_series(e, p, 4)?;
    let mut tail = LaurentTail::zero(p.clone(), (-s.val()).max(0));
    if s.val() >= 0 {
        return Ok(tail);
    }
    let scale = s.head_scale().max(1e-300);
    for k in s.val()..0 {
        let c = s.coeff(k);
        if c.norm() > tol.eq * scale * 1e-3 {
            tail.coefficients.insert(k, c);
        }
    }
    Ok(tail)
}

/// Order of vanishing of `e` at `p` (negative at a pole); `None` for the zero
/// element.
pub fn valuation(e: &FieldElement, p: &Place) -> Result<Option<i32>> {
    if e.is_zero() {
        return Ok(None);
    }
    let s = expand_series(e, p, 6)?;
    Ok(s.true_val())
}

/// Residue of the differential `e·dx` at `p` (the `w⁻¹` coefficient of
/// `e·(dx/dw)` in the place's local coordinate).
pub fn residue_at(e: &FieldElement, p: &Place) -> Result<Complex64> {
    if e.is_zero() {
        return Ok(Complex64::default());
    }
    let s = expand_series(e, p, 8)?;
    let chart = e.curve().chart(p, (s.prec() - s.val()).max(8))?;
    let prod = s.mul(&chart.dx_dw);
    if prod.prec() <= -1 {
        // Widen until the w^{-1} coefficient is inside the window.
        let s = expand_series(e, p, (-prod.prec() + 10).max(8))?;
        let chart = e.curve().chart(p, (s.prec() - s.val()).max(8))?;
        let prod = s.mul(&chart.dx_dw);
        if prod.prec() <= -1 {
            return Err(LaxError::ExpansionFailure("residue window too small".into()));
        }
        return Ok(if prod.val() > -1 { Complex64::default() } else { prod.coeff(-1) });
    }
    Ok(if prod.val() > -1 { Complex64::default() } else { prod.coeff(-1) })
}

/// Places where `e·dx` can have poles: places over denominator roots plus all
/// infinite places. Regular candidates are harmless (their residue is 0).
pub fn pole_candidates(e: &FieldElement, tol: &Tol) -> Vec<Place> {
    let mut places: Vec<Place> = Vec::new();
    let mut push = |p: Place| {
        if !places.iter().any(|q| q.same(&p, tol)) {
            places.push(p);
        }
    };
    for r in e.den().roots() {
        for p in e.curve().places_over(r, tol) {
            push(p);
        }
    }
    for p in e.curve().infinite_places() {
        push(p);
    }
    places
}

/// Sum of residues of `e·dx` over all candidate poles. Zero for every
/// meromorphic `e` by the residue theorem; exported for tests and diagnostics.
pub fn residue_sum(e: &FieldElement, tol: &Tol) -> Result<Complex64> {
    let mut acc = Complex64::default();
    for p in pole_candidates(e, tol) {
        acc += residue_at(e, &p)?;
    }
    Ok(acc)
}

/// Zero divisor of a nonzero element: places with positive valuation and
/// their orders. Finite zeros are located through the norm polynomial
/// `a² − f·b²` (the numerator itself on the rational line).
pub fn zero_divisor(
    e: &FieldElement,
    tol: &Tol,
) -> Result<Vec<(Place, i32)>> {
    if e.is_zero() {
        return Err(LaxError::Precondition("zero divisor of the zero element".into()));
    }
    let norm = match e.curve().f() {
        Some(f) => {
            let a2 = e.num_x().clone();
            let a2 = &a2 * e.num_x();
            let b2 = &(e.num_y().clone()) * e.num_y();
            &a2 - &(&b2 * f)
        }
        None => e.num_x().clone(),
    };
    let mut xs: Vec<Complex64> = Vec::new();
    for r in norm.roots() {
        if !xs.iter().any(|x| (x - r).norm() <= tol.place * (1.0 + r.norm())) {
            xs.push(r);
        }
    }
    let mut out = Vec::new();
    let mut seen: Vec<Place> = Vec::new();
    let mut visit = |p: Place, out: &mut Vec<(Place, i32)>| -> Result<()> {
        if seen.iter().any(|q| q.same(&p, tol)) {
            return Ok(());
        }
        seen.push(p.clone());
        if let Some(v) = valuation(e, &p)? {
            if v > 0 {
                out.push((p, v));
            }
        }
        Ok(())
    };
    for x in xs {
        for p in e.curve().places_over(x, tol) {
            visit(p, &mut out)?;
        }
    }
    for p in e.curve().infinite_places() {
        visit(p, &mut out)?;
    }
    Ok(out)
}
