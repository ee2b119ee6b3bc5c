//! Truncated Laurent series in a local coordinate.
//!
//! A [`Series`] stores the window `[val, prec)`: coefficients of `w^k` for
//! `val <= k < prec` are known, everything at or above `prec` is `O(w^prec)`.
//! Leading stored coefficients may be numerically zero — `val` is a lower
//! bound on the true valuation, not the valuation itself. Operations
//! propagate the window the standard way (multiplication adds valuations and
//! keeps the tighter relative precision; division locates the divisor's true
//! valuation with a relative threshold first).

use num_complex::Complex64;

use crate::poly::Poly;

/// Relative threshold for "this stored coefficient is actually zero" when a
/// leading coefficient must be identified (division, sqrt, valuation).
const LEAD_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Series {
    val: i32,
    prec: i32,
    coeffs: Vec<Complex64>,
}

impl Series {
    pub fn new(val: i32, prec: i32, coeffs: Vec<Complex64>) -> Self {
        assert_eq!((prec - val) as usize, coeffs.len(), "window/coefficient mismatch");
        Series { val, prec, coeffs }
    }

    /// The zero series known to precision `prec`.
    pub fn zero(prec: i32) -> Self {
        Series { val: prec, prec, coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64, prec: i32) -> Self {
        let mut s = Series::zero(prec);
        if prec > 0 {
            s.val = 0;
            s.coeffs = vec![Complex64::default(); prec as usize];
            s.coeffs[0] = c;
        }
        s
    }

    /// The monomial `c · w^k`, known up to `O(w^prec)`.
    pub fn monomial(c: Complex64, k: i32, prec: i32) -> Self {
        if k >= prec {
            return Series::zero(prec);
        }
        let mut coeffs = vec![Complex64::default(); (prec - k) as usize];
        coeffs[0] = c;
        Series { val: k, prec, coeffs }
    }

    pub fn val(&self) -> i32 {
        self.val
    }

    pub fn prec(&self) -> i32 {
        self.prec
    }

    /// Coefficient of `w^k`; zero below the window, panics at or above `prec`.
    pub fn coeff(&self, k: i32) -> Complex64 {
        assert!(k < self.prec, "coefficient {k} beyond precision O(w^{})", self.prec);
        if k < self.val {
            Complex64::default()
        } else {
            self.coeffs[(k - self.val) as usize]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Index of the first non-negligible coefficient, or `None` if the whole
    /// window is numerically zero.
    ///
    /// Coefficients grow geometrically when another singularity lies near the
    /// expansion point, so a global window maximum is useless as a scale; each
    /// candidate leading coefficient is judged against a short sliding head
    /// window instead.
    pub fn true_val(&self) -> Option<i32> {
        const HEAD: usize = 12;
        let n = self.coeffs.len();
        for k in 0..n {
            let end = (k + HEAD).min(n);
            let scale = self.coeffs[k..end].iter().map(|c| c.norm()).fold(0.0, f64::max);
            if scale > 0.0 && self.coeffs[k].norm() > LEAD_EPS * scale {
                return Some(self.val + k as i32);
            }
        }
        None
    }

    /// Magnitude scale of the leading part of the series: the max coefficient
    /// norm over a short head window starting at the true valuation.
    pub fn head_scale(&self) -> f64 {
        const HEAD: usize = 12;
        match self.true_val() {
            None => 0.0,
            Some(v) => {
                let start = (v - self.val) as usize;
                let end = (start + HEAD).min(self.coeffs.len());
                self.coeffs[start..end].iter().map(|c| c.norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Drop stored leading coefficients below the relative threshold, raising
    /// `val` to the true valuation. The all-zero series becomes `zero(prec)`.
    pub fn normalized(&self) -> Series {
        match self.true_val() {
            None => Series::zero(self.prec),
            Some(v) => {
                let skip = (v - self.val) as usize;
                Series {
                    val: v,
                    prec: self.prec,
                    coeffs: self.coeffs[skip..].to_vec(),
                }
            }
        }
    }

    /// Restrict the window to `[lo, hi]` inclusive; requires `hi < prec`.
    pub fn window(&self, lo: i32, hi: i32) -> Vec<Complex64> {
        assert!(hi < self.prec, "window end {hi} beyond precision {}", self.prec);
        (lo..=hi).map(|k| self.coeff(k)).collect()
    }

    pub fn truncate(&self, prec: i32) -> Series {
        if prec >= self.prec {
            return self.clone();
        }
        if prec <= self.val {
            return Series::zero(prec);
        }
        Series {
            val: self.val,
            prec,
            coeffs: self.coeffs[..(prec - self.val) as usize].to_vec(),
        }
    }

    pub fn add(&self, rhs: &Series) -> Series {
        let prec = self.prec.min(rhs.prec);
        let val = self.val.min(rhs.val).min(prec);
        let mut coeffs = vec![Complex64::default(); (prec - val) as usize];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let idx = val + k as i32;
            let a = if idx >= self.val && idx < self.prec { self.coeff(idx) } else { Complex64::default() };
            let b = if idx >= rhs.val && idx < rhs.prec { rhs.coeff(idx) } else { Complex64::default() };
            *c = a + b;
        }
        Series { val, prec, coeffs }
    }

    pub fn neg(&self) -> Series {
        Series {
            val: self.val,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }

    pub fn sub(&self, rhs: &Series) -> Series {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: Complex64) -> Series {
        Series {
            val: self.val,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn mul(&self, rhs: &Series) -> Series {
        let prec = (self.val + rhs.prec).min(rhs.val + self.prec);
        let val = self.val + rhs.val;
        if val >= prec {
            return Series::zero(prec);
        }
        let mut coeffs = vec![Complex64::default(); (prec - val) as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                let k = i + j;
                if k < coeffs.len() {
                    coeffs[k] += a * b;
                }
            }
        }
        Series { val, prec, coeffs }
    }

    /// Multiply by `w^k` (shifts the window).
    pub fn shift(&self, k: i32) -> Series {
        Series {
            val: self.val + k,
            prec: self.prec + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Multiplicative inverse. The divisor's true valuation is located with a
    /// relative threshold; fails on the numerically-zero series.
    pub fn recip(&self) -> Option<Series> {
        let n = self.normalized();
        if n.coeffs.is_empty() {
            return None;
        }
        let rel = n.coeffs.len();
        let lead = n.coeffs[0];
        let mut inv = vec![Complex64::default(); rel];
        inv[0] = lead.inv();
        for k in 1..rel {
            let mut acc = Complex64::default();
            for j in 1..=k {
                acc += n.coeffs[j] * inv[k - j];
            }
            inv[k] = -acc / lead;
        }
        Some(Series {
            val: -n.val,
            prec: -n.val + rel as i32,
            coeffs: inv,
        })
    }

    pub fn div(&self, rhs: &Series) -> Option<Series> {
        Some(self.mul(&rhs.recip()?))
    }

    /// Square root. Requires the true valuation to be even; the branch of the
    /// leading coefficient is the principal square root.
    pub fn sqrt(&self) -> Option<Series> {
        let n = self.normalized();
        if n.coeffs.is_empty() || n.val % 2 != 0 {
            return None;
        }
        let rel = n.coeffs.len();
        let lead = n.coeffs[0].sqrt();
        // (lead + Σ_{k>=1} s_k w^k)² = n  ⇒ recurrence on s_k.
        let mut s = vec![Complex64::default(); rel];
        s[0] = lead;
        for k in 1..rel {
            let mut acc = n.coeffs[k];
            for j in 1..k {
                acc -= s[j] * s[k - j];
            }
            s[k] = acc / (s[0] * 2.0);
        }
        Some(Series {
            val: n.val / 2,
            prec: n.val / 2 + rel as i32,
            coeffs: s,
        })
    }

    /// Formal derivative d/dw.
    pub fn derivative(&self) -> Series {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.val + i as i32;
            coeffs.push(c * (k as f64));
        }
        // d/dw drops the constant term's information; window shifts down by one.
        Series {
            val: self.val - 1,
            prec: self.prec - 1,
            coeffs,
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: u32) -> Series {
        if n == 0 {
            return Series::constant(Complex64::new(1.0, 0.0), (self.prec - self.val).max(1));
        }
        let mut acc: Option<Series> = None;
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc.unwrap()
    }
}

/// Evaluate a polynomial on a series argument (Horner). The argument must
/// have nonnegative valuation; truncation follows the argument's precision.
pub fn compose_poly(p: &Poly, arg: &Series) -> Series {
    assert!(arg.val() >= 0, "polynomial composition needs val >= 0");
    let prec = arg.prec();
    let mut acc = Series::zero(prec);
    for &c in p.coeffs().iter().rev() {
        acc = acc.mul(arg).add(&Series::constant(c, prec));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cr;
    use approx::assert_abs_diff_eq;

    fn geom(prec: i32) -> Series {
        // 1/(1-w) = Σ w^k
        let coeffs = vec![Complex64::new(1.0, 0.0); prec as usize];
        Series::new(0, prec, coeffs)
    }

    #[test]
    fn recip_of_one_minus_w() {
        let mut coeffs = vec![Complex64::default(); 8];
        coeffs[0] = cr(1.0);
        coeffs[1] = cr(-1.0);
        let s = Series::new(0, 8, coeffs);
        let r = s.recip().unwrap();
        for k in 0..8 {
            assert_abs_diff_eq!((r.coeff(k) - cr(1.0)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn mul_tracks_precision() {
        let a = Series::monomial(cr(1.0), -2, 4); // w^{-2} + O(w^4)
        let b = geom(6);
        let p = a.mul(&b);
        assert_eq!(p.val(), -2);
        assert_eq!(p.prec(), 4);
        assert_abs_diff_eq!((p.coeff(-2) - cr(1.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((p.coeff(3) - cr(1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_round_trip() {
        // sqrt(1 + w) squared.
        let mut coeffs = vec![Complex64::default(); 10];
        coeffs[0] = cr(1.0);
        coeffs[1] = cr(1.0);
        let s = Series::new(0, 10, coeffs);
        let r = s.sqrt().unwrap();
        let sq = r.mul(&r);
        for k in 0..sq.prec() {
            assert_abs_diff_eq!((sq.coeff(k) - s.coeff(k)).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn compose_polynomial() {
        // p(x) = x^2 + 1 at x = w + w^2.
        let p = Poly::new(vec![cr(1.0), cr(0.0), cr(1.0)]);
        let mut coeffs = vec![Complex64::default(); 5];
        coeffs[0] = cr(1.0);
        coeffs[1] = cr(1.0);
        let arg = Series::new(1, 6, coeffs);
        let out = compose_poly(&p, &arg);
        // (w + w^2)^2 + 1 = 1 + w^2 + 2w^3 + w^4.
        assert_abs_diff_eq!((out.coeff(0) - cr(1.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.coeff(1).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((out.coeff(2) - cr(1.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((out.coeff(3) - cr(2.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((out.coeff(4) - cr(1.0)).norm(), 0.0, epsilon = 1e-14);
    }
}
