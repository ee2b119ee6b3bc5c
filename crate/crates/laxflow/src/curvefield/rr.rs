//! Riemann-Roch spaces `L(D) = {g : (g) + D ≥ 0}`.
//!
//! The basis is assembled from the spanning set `{xʲ/d, y·xʲ/d}` where `d`
//! vanishes on the finite pole support of `D` with sufficient multiplicity;
//! order conditions at every relevant place are imposed via Laurent expansion
//! and a numerical nullspace is extracted by SVD.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::poly::Poly;
use crate::Tol;

use super::curve::{BaseCurve, Place};
use super::divisor::Divisor;
use super::element::FieldElement;
use super::expand::laurent_expand;

/// A spanning candidate `x^j · y^{use_y} / d`.
struct Candidate {
    j: usize,
    use_y: bool,
}

/// Basis of `L(D)`, linearly independent, in a deterministic order.
///
/// Empty when `L(D) = 0`. For `deg D > 2g − 2` the dimension is exactly
/// `deg D − g + 1`.
pub fn rr_basis(
    curve: &std::sync::Arc<BaseCurve>,
    d_div: &Divisor,
    tol: &Tol,
) -> Result<Vec<FieldElement>> {
    let hyper = !curve.is_rational();
    let f_deg = curve.f().map(|f| f.degree()).unwrap_or(1) as i32;
    let odd = f_deg % 2 == 1;

    // Denominator d(x): for each distinct finite x-coordinate in the pole
    // part, enough multiplicity to host the worst pole above it.
    let mut den_factors: Vec<(Complex64, i32)> = Vec::new();
    for (p, m) in d_div.iter() {
        if *m <= 0 {
            continue;
        }
        if let Some(x0) = p.x() {
            let ram = p.ram_index(curve);
            let k = (*m + ram - 1) / ram;
            match den_factors
                .iter_mut()
                .find(|(x, _)| (*x - x0).norm() <= tol.place)
            {
                Some(entry) => entry.1 = entry.1.max(k),
                None => den_factors.push((x0, k)),
            }
        }
    }
    let mut den = Poly::one();
    for (x0, k) in &den_factors {
        for _ in 0..*k {
            den = &den * &Poly::new(vec![-x0, Complex64::new(1.0, 0.0)]);
        }
    }
    let deg_den = den.degree().max(0) as i32;

    // Allowed pole order at each infinite place.
    let inf_places = curve.infinite_places();
    let n_inf: Vec<i32> = inf_places.iter().map(|p| d_div.mult_at(p, tol)).collect();
    let n_inf_max = n_inf.iter().copied().max().unwrap_or(0);

    // Valuations at infinity of x, y and d per infinite place.
    let (vx, vy) = if !hyper {
        (-1i32, 0i32)
    } else if odd {
        (-2, -f_deg)
    } else {
        (-1, -(f_deg / 2))
    };
    let v_den = vx * deg_den;

    // Degree caps: highest j with val_inf(candidate) + n_inf >= 0, plus margin.
    let jx_cap = (n_inf_max - v_den) / (-vx) + 1;
    let jy_cap = if hyper { (n_inf_max - v_den + vy) / (-vx) + 1 } else { -1 };

    let mut cands: Vec<Candidate> = Vec::new();
    for j in 0..=jx_cap.max(0) {
        cands.push(Candidate { j: j as usize, use_y: false });
    }
    if hyper {
        for j in 0..=jy_cap {
            if j >= 0 {
                cands.push(Candidate { j: j as usize, use_y: true });
            }
        }
    }

    let elems: Vec<FieldElement> = cands
        .iter()
        .map(|c| {
            let mut num = Poly::zero();
            let mut xs = Poly::one();
            for _ in 0..c.j {
                xs = &xs * &Poly::x();
            }
            num = &num + &xs;
            if c.use_y {
                FieldElement::new(curve.clone(), Poly::zero(), num, den.clone())
            } else {
                FieldElement::new(curve.clone(), num, Poly::zero(), den.clone())
            }
        })
        .collect();

    // Constraint places: everything above the denominator support, the whole
    // support of D, and all infinite places.
    let mut constraint_places: Vec<Place> = Vec::new();
    let mut push = |p: Place| {
        if !constraint_places.iter().any(|q| q.same(&p, tol)) {
            constraint_places.push(p);
        }
    };
    for (x0, _) in &den_factors {
        for p in curve.places_over(*x0, tol) {
            push(p);
        }
    }
    for (p, _) in d_div.iter() {
        push(p.clone());
    }
    for p in &inf_places {
        push(p.clone());
    }

    // Rows: at place q with divisor multiplicity n_q, coefficients of w^k for
    // lb_q <= k <= -n_q - 1 must vanish.
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for q in &constraint_places {
        let n_q = d_div.mult_at(q, tol);
        let lb_q = if q.is_infinite() {
            // Most singular candidate: j = cap with the y-part.
            let worst_x = vx * jx_cap - v_den;
            let worst_y = if hyper { vx * jy_cap.max(0) + vy - v_den } else { worst_x };
            worst_x.min(worst_y)
        } else {
            let ram = q.ram_index(curve);
            let k = den_factors
                .iter()
                .find(|(x, _)| q.x().map(|qx| (qx - *x).norm() <= tol.place).unwrap_or(false))
                .map(|(_, k)| *k)
                .unwrap_or(0);
            -k * ram
        };
        if lb_q > -n_q - 1 {
            continue;
        }
        let mut windows: Vec<Vec<Complex64>> = Vec::with_capacity(elems.len());
        for e in &elems {
            windows.push(laurent_expand(e, q, lb_q, -n_q - 1)?);
        }
        let len = (-n_q - lb_q) as usize;
        for idx in 0..len {
            rows.push(windows.iter().map(|w| w[idx]).collect());
        }
    }

    // Nullspace by SVD; pad with zero rows so the full right factor is
    // available when there are fewer constraints than candidates.
    let ncols = elems.len();
    let nrows = rows.len().max(ncols);
    let mut a = DMatrix::<Complex64>::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let svd = a.svd(true, true);
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let mut basis = Vec::new();
    for i in 0..ncols {
        let s = if i < sigma.len() { sigma[i] } else { 0.0 };
        if s <= tol.rank * smax.max(1.0) {
            // Nullspace vector = conjugate of row i of V^H.
            let mut acc = FieldElement::zero(curve.clone());
            for (j, e) in elems.iter().enumerate() {
                let c = vt[(i, j)].conj();
                if c.norm() > 1e-13 {
                    acc = acc.add(&e.scale(c))?;
                }
            }
            if !acc.is_zero() {
                basis.push(acc);
            }
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvefield::expand::valuation;
    use crate::poly::cr;

    #[test]
    fn polynomials_of_degree_three_on_p1() {
        let c = BaseCurve::rational_line();
        let tol = Tol::default();
        let d = Divisor::single(Place::infinity(0), 3);
        let b = rr_basis(&c, &d, &tol).unwrap();
        assert_eq!(b.len(), 4);
        for e in &b {
            assert!(e.num_y().is_zero());
            assert!(e.den().degree() == 0);
            assert!(e.num_x().degree() <= 3);
        }
    }

    #[test]
    fn riemann_roch_dimension_on_genus_two() {
        let tol = Tol::default();
        let f = Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        // deg D = 5 > 2g−2 = 2 ⇒ dim = 5 − 2 + 1 = 4.
        let mut d = Divisor::single(Place::infinity(0), 3);
        for p in curve.places_over(cr(0.7), &tol) {
            d.push(p, 1, &tol);
        }
        assert_eq!(d.degree(), 5);
        let b = rr_basis(&curve, &d, &tol).unwrap();
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn l_of_canonical_has_dimension_g() {
        let tol = Tol::default();
        let f = Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        let k = super::super::divisor::canonical_divisor(&curve).unwrap();
        let b = rr_basis(&curve, &k, &tol).unwrap();
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn trivial_divisor_gives_constants() {
        let tol = Tol::default();
        let f = Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        let b = rr_basis(&curve, &Divisor::new(), &tol).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].num_x().degree(), 0);
    }

    #[test]
    fn basis_members_respect_pole_bounds() {
        let tol = Tol::default();
        let f = Poly::new(vec![cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]);
        let curve = BaseCurve::hyperelliptic(f, &tol).unwrap();
        let mut d = Divisor::single(Place::infinity(0), 2);
        let ps = curve.places_over(cr(-0.4), &tol);
        d.push(ps[0].clone(), 1, &tol);
        let b = rr_basis(&curve, &d, &tol).unwrap();
        assert_eq!(b.len(), 2); // deg 3 > 2 ⇒ 3 − 2 + 1
        for e in &b {
            for (p, m) in d.iter() {
                let v = valuation(e, p).unwrap().unwrap_or(i32::MAX);
                assert!(v >= -m, "pole order {v} exceeds allowance {m} at {p}");
            }
            // No pole at the conjugate place.
            let v = valuation(e, &ps[1]).unwrap().unwrap_or(i32::MAX);
            assert!(v >= 0);
        }
    }

    #[test]
    fn zero_space_when_divisor_negative() {
        let c = BaseCurve::rational_line();
        let tol = Tol::default();
        let d = Divisor::single(Place::finite_regular(cr(0.0), cr(0.0)), -1);
        let b = rr_basis(&c, &d, &tol).unwrap();
        assert!(b.is_empty());
    }
}
