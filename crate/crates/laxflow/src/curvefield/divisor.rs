//! Divisors on the base curve and the canonical divisor.

use std::sync::Arc;

use crate::error::{LaxError, Result};
use crate::Tol;

use super::curve::{BaseCurve, Place};

/// A finite formal sum of places with integer multiplicities.
///
/// Places are merged under tolerance-based identity; zero multiplicities are
/// dropped.
#[derive(Debug, Clone, Default)]
pub struct Divisor {
    support: Vec<(Place, i32)>,
}

impl Divisor {
    pub fn new() -> Self {
        Divisor { support: Vec::new() }
    }

    pub fn of(entries: Vec<(Place, i32)>, tol: &Tol) -> Self {
        let mut d = Divisor::new();
        for (p, m) in entries {
            d.push(p, m, tol);
        }
        d
    }

    pub fn single(p: Place, mult: i32) -> Self {
        Divisor { support: vec![(p, mult)] }
    }

    pub fn push(&mut self, p: Place, mult: i32, tol: &Tol) {
        if mult == 0 {
            return;
        }
        for (q, m) in self.support.iter_mut() {
            if q.same(&p, tol) {
                *m += mult;
                self.support.retain(|(_, m)| *m != 0);
                return;
            }
        }
        self.support.push((p, mult));
    }

    pub fn add(&self, rhs: &Divisor, tol: &Tol) -> Divisor {
        let mut out = self.clone();
        for (p, m) in &rhs.support {
            out.push(p.clone(), *m, tol);
        }
        out
    }

    pub fn scaled(&self, k: i32) -> Divisor {
        if k == 0 {
            return Divisor::new();
        }
        Divisor { support: self.support.iter().map(|(p, m)| (p.clone(), m * k)).collect() }
    }

    pub fn support(&self) -> &[(Place, i32)] {
        &self.support
    }

    pub fn degree(&self) -> i32 {
        self.support.iter().map(|(_, m)| m).sum()
    }

    pub fn mult_at(&self, p: &Place, tol: &Tol) -> i32 {
        self.support
            .iter()
            .find(|(q, _)| q.same(p, tol))
            .map(|(_, m)| *m)
            .unwrap_or(0)
    }

    pub fn is_effective(&self) -> bool {
        self.support.iter().all(|(_, m)| *m > 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Place, i32)> {
        self.support.iter()
    }
}

/// Divisor of the differential `dx/y` on a hyperelliptic curve: degree
/// `2g − 2`, supported at infinity.
///
/// Odd-degree models carry the whole weight `2g−2` on the single ramified
/// infinite place; even-degree models split it `(g−1) + (g−1)` over the two.
/// The rational line is rejected: its canonical class has no effective
/// representative, and callers in that regime use the tail-support divisor at
/// infinity instead.
pub fn canonical_divisor(curve: &Arc<BaseCurve>) -> Result<Divisor> {
    match curve.as_ref() {
        BaseCurve::RationalLine => Err(LaxError::NoCanonicalDivisor),
        BaseCurve::Hyperelliptic { f, genus } => {
            let g = *genus as i32;
            let mut d = Divisor::new();
            if g < 1 {
                return Ok(d);
            }
            if f.degree() % 2 == 1 {
                d.support.push((Place::infinity(0), 2 * g - 2));
            } else {
                d.support.push((Place::infinity(0), g - 1));
                d.support.push((Place::infinity(1), g - 1));
            }
            d.support.retain(|(_, m)| *m != 0);
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvefield::expand::valuation;
    use crate::curvefield::FieldElement;
    use crate::poly::{cr, Poly};

    #[test]
    fn canonical_degree_matches_genus() {
        let tol = Tol::default();
        // genus 2, odd model y² = x⁵ + x + 1.
        let f5 = Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let c2 = BaseCurve::hyperelliptic(f5, &tol).unwrap();
        let k2 = canonical_divisor(&c2).unwrap();
        assert_eq!(k2.degree(), 2);
        assert_eq!(k2.support().len(), 1);
        assert!(k2.support()[0].0.is_infinite());

        // genus 3, odd model of degree 7.
        let mut coeffs = vec![cr(1.0); 8];
        coeffs[1] = cr(2.0);
        let f7 = Poly::new(coeffs);
        let c3 = BaseCurve::hyperelliptic(f7, &tol).unwrap();
        assert_eq!(canonical_divisor(&c3).unwrap().degree(), 4);
    }

    #[test]
    fn canonical_divisor_matches_order_bookkeeping() {
        // Order of vanishing of dx/y at every place type on y² = x⁵ + x + 1:
        // expand 1/y and multiply by dx/dw implicitly through valuations.
        let tol = Tol::default();
        let f = Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f.clone(), &tol).unwrap();
        let y = FieldElement::y(curve.clone());
        let inv_y = FieldElement::one(curve.clone()).div(&y).unwrap();

        // At infinity: ord(1/y) = 5, ord(dx) = ord(-2w^{-3} dw) = -3 ⇒ ord(dx/y) = 2 = 2g−2.
        assert_eq!(valuation(&inv_y, &Place::infinity(0)).unwrap(), Some(5));

        // At a branch point x0 (root of f): ord(1/y) = −1, ord(dx) = +1 ⇒ 0.
        let x0 = f.roots()[0];
        let p = Place::finite_branch(x0);
        assert_eq!(valuation(&inv_y, &p).unwrap(), Some(-1));
        let x = FieldElement::x(curve.clone());
        let shifted = x
            .sub(&FieldElement::constant(curve.clone(), x0))
            .unwrap();
        // dx = d(x−x0) has ord 1 at the branch point.
        assert_eq!(valuation(&shifted, &p).unwrap(), Some(2));
    }

    #[test]
    fn rational_line_has_no_effective_canonical() {
        let c = BaseCurve::rational_line();
        assert!(matches!(canonical_divisor(&c), Err(LaxError::NoCanonicalDivisor)));
    }

    #[test]
    fn merging_under_tolerance() {
        let tol = Tol::default();
        let mut d = Divisor::new();
        d.push(Place::finite_regular(cr(1.0), cr(2.0)), 1, &tol);
        d.push(Place::finite_regular(cr(1.0) + cr(1e-12), cr(2.0)), 2, &tol);
        assert_eq!(d.support().len(), 1);
        assert_eq!(d.degree(), 3);
        d.push(Place::finite_regular(cr(1.0), cr(2.0)), -3, &tol);
        assert_eq!(d.support().len(), 0);
    }
}
