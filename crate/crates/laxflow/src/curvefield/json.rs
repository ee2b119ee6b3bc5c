//! JSON wire formats for curves, places, divisors and field elements.
//!
//! Complex numbers are `[re, im]` pairs; polynomials are coefficient arrays
//! in ascending degree.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LaxError, Result};
use crate::poly::Poly;
use crate::Tol;

use super::curve::{BaseCurve, Chart, Place};
use super::divisor::Divisor;
use super::element::FieldElement;

pub fn complex_to_json(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn complex_from_json(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

pub fn poly_to_json(p: &Poly) -> Vec<[f64; 2]> {
    p.coeffs().iter().map(|&c| complex_to_json(c)).collect()
}

pub fn poly_from_json(v: &[[f64; 2]]) -> Poly {
    Poly::new(v.iter().map(|&c| complex_from_json(c)).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveJson {
    RationalLine,
    Hyperelliptic { f: Vec<[f64; 2]> },
}

impl CurveJson {
    pub fn from_curve(c: &BaseCurve) -> Self {
        match c {
            BaseCurve::RationalLine => CurveJson::RationalLine,
            BaseCurve::Hyperelliptic { f, .. } => CurveJson::Hyperelliptic { f: poly_to_json(f) },
        }
    }

    pub fn to_curve(&self, tol: &Tol) -> Result<Arc<BaseCurve>> {
        match self {
            CurveJson::RationalLine => Ok(BaseCurve::rational_line()),
            CurveJson::Hyperelliptic { f } => BaseCurve::hyperelliptic(poly_from_json(f), tol),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "snake_case")]
pub enum PlaceJson {
    FiniteRegular { x: [f64; 2], y: [f64; 2] },
    FiniteBranch { x: [f64; 2] },
    Infinity { sheet: u8 },
}

impl PlaceJson {
    pub fn from_place(p: &Place) -> Self {
        match &p.chart {
            Chart::FiniteRegular { x, y } => PlaceJson::FiniteRegular {
                x: complex_to_json(*x),
                y: complex_to_json(*y),
            },
            Chart::FiniteBranch { x } => PlaceJson::FiniteBranch { x: complex_to_json(*x) },
            Chart::Infinity { sheet } => PlaceJson::Infinity { sheet: *sheet },
        }
    }

    pub fn to_place(&self) -> Place {
        match self {
            PlaceJson::FiniteRegular { x, y } => {
                Place::finite_regular(complex_from_json(*x), complex_from_json(*y))
            }
            PlaceJson::FiniteBranch { x } => Place::finite_branch(complex_from_json(*x)),
            PlaceJson::Infinity { sheet } => Place::infinity(*sheet),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorEntryJson {
    pub place: PlaceJson,
    pub mult: i32,
}

pub fn divisor_to_json(d: &Divisor) -> Vec<DivisorEntryJson> {
    d.iter()
        .map(|(p, m)| DivisorEntryJson { place: PlaceJson::from_place(p), mult: *m })
        .collect()
}

pub fn divisor_from_json(v: &[DivisorEntryJson], tol: &Tol) -> Divisor {
    Divisor::of(v.iter().map(|e| (e.place.to_place(), e.mult)).collect(), tol)
}

/// `(a + y·b)/d` as coefficient arrays; `b` is omitted when zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementJson {
    pub a: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<[f64; 2]>,
    pub d: Vec<[f64; 2]>,
}

impl ElementJson {
    pub fn from_element(e: &FieldElement) -> Self {
        ElementJson {
            a: poly_to_json(e.num_x()),
            b: poly_to_json(e.num_y()),
            d: poly_to_json(e.den()),
        }
    }

    pub fn to_element(&self, curve: Arc<BaseCurve>) -> Result<FieldElement> {
        let d = poly_from_json(&self.d);
        if d.is_zero() {
            return Err(LaxError::Config("element with zero denominator".into()));
        }
        Ok(FieldElement::new(
            curve,
            poly_from_json(&self.a),
            poly_from_json(&self.b),
            d,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cr;

    #[test]
    fn round_trip_curve_place_divisor() {
        let tol = Tol::default();
        let f = Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        let cj = CurveJson::from_curve(&curve);
        let s = serde_json::to_string(&cj).unwrap();
        assert!(s.contains("\"kind\":\"hyperelliptic\""));
        let back = serde_json::from_str::<CurveJson>(&s).unwrap().to_curve(&tol).unwrap();
        assert!(BaseCurve::same_curve(&curve, &back));

        let p = Place::finite_regular(cr(0.5), cr(1.25));
        let pj = serde_json::to_string(&PlaceJson::from_place(&p)).unwrap();
        assert!(pj.contains("finite_regular"));
        let pb = serde_json::from_str::<PlaceJson>(&pj).unwrap().to_place();
        assert!(p.same(&pb, &tol));

        let d = Divisor::of(vec![(p, 2), (Place::infinity(0), -1)], &tol);
        let dj = divisor_to_json(&d);
        let db = divisor_from_json(&dj, &tol);
        assert_eq!(db.degree(), d.degree());
    }
}
