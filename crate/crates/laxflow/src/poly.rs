//! Dense univariate polynomials over ℂ in double precision.
//!
//! Coefficients are stored in ascending degree order. All construction paths
//! strip trailing coefficients that are negligible relative to the largest
//! one, so `degree` is meaningful for numerically computed data.

use num_complex::Complex64;

use crate::lex_cmp;

/// Relative threshold below which a trailing coefficient counts as zero.
const TRIM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Poly::one();
        for &r in roots {
            p = &p * &Poly::new(vec![-r, Complex64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero outside the stored range).
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `deg 0 = -1` by convention.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn trim(&mut self) {
        let scale = self.max_abs();
        if scale == 0.0 {
            self.coeffs.clear();
            return;
        }
        while let Some(&last) = self.coeffs.last() {
            if last.norm() <= TRIM_EPS * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.iter().all(|c| c.norm() <= TRIM_EPS * scale) {
            self.coeffs.clear();
        }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::default();
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * ((i + 1) as f64))
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Divide by the leading coefficient. No-op on the zero polynomial.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(self.leading().inv())
    }

    /// Synthetic division by `(x - r)`; returns the quotient, discarding the
    /// remainder (callers deflate at known roots).
    pub fn deflate(&self, r: Complex64) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let n = self.coeffs.len();
        let mut q = vec![Complex64::default(); n - 1];
        let mut carry = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = carry;
            carry = self.coeffs[k] + carry * r;
        }
        Poly::new(q)
    }

    /// Remainder of evaluation-style division by `(x - r)` is `self.eval(r)`;
    /// full polynomial division for general divisors.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.degree() < d.degree() {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dn = d.coeffs.len();
        let lead = d.leading();
        let qlen = rem.len() - dn + 1;
        let mut q = vec![Complex64::default(); qlen];
        for k in (0..qlen).rev() {
            let c = rem[k + dn - 1] / lead;
            q[k] = c;
            for j in 0..dn {
                rem[k + j] -= c * d.coeffs[j];
            }
        }
        (Poly::new(q), Poly::new(rem))
    }

    /// All complex roots, each listed with multiplicity, in lexicographic
    /// order. Durand-Kerner iteration polished by Newton steps on the
    /// original polynomial.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n <= 0 {
            return Vec::new();
        }
        let monic = self.monic();
        let n = n as usize;

        // Cauchy bound for the root radius.
        let radius = 1.0
            + monic.coeffs[..n]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
        let radius = radius.min(1e8);

        // Deterministic non-symmetric start configuration.
        let mut zs: Vec<Complex64> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.41;
                Complex64::from_polar(radius * 0.7, theta)
            })
            .collect();

        for _ in 0..400 {
            let mut delta_max = 0.0f64;
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= zs[i] - zs[j];
                    }
                }
                if denom.norm() < 1e-300 {
                    // Perturb coincident iterates.
                    zs[i] += Complex64::new(1e-8, 1e-8);
                    continue;
                }
                let step = monic.eval(zs[i]) / denom;
                zs[i] -= step;
                delta_max = delta_max.max(step.norm());
            }
            if delta_max < 1e-14 * radius.max(1.0) {
                break;
            }
        }

        // Newton polish against the original polynomial.
        let deriv = monic.derivative();
        for z in zs.iter_mut() {
            for _ in 0..4 {
                let d = deriv.eval(*z);
                if d.norm() < 1e-300 {
                    break;
                }
                let step = monic.eval(*z) / d;
                if step.norm() > 1.0 {
                    break;
                }
                *z -= step;
            }
        }

        zs.sort_by(|a, b| lex_cmp(*a, *b));
        zs
    }

    /// Minimal pairwise root separation; `None` for degree < 2.
    pub fn root_separation(&self) -> Option<f64> {
        let rs = self.roots();
        if rs.len() < 2 {
            return None;
        }
        let mut min = f64::INFINITY;
        for i in 0..rs.len() {
            for j in i + 1..rs.len() {
                min = min.min((rs[i] - rs[j]).norm());
            }
        }
        Some(min)
    }

    /// Squarefree check by root separation relative to the root scale.
    pub fn is_squarefree(&self, tol: f64) -> bool {
        match self.root_separation() {
            None => true,
            Some(sep) => {
                let scale = self
                    .roots()
                    .iter()
                    .map(|r| r.norm())
                    .fold(1.0f64, f64::max);
                sep > tol * scale
            }
        }
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![Complex64::default(); n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in rhs.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Poly::new(out)
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![Complex64::default(); n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in rhs.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Poly::new(out)
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::default(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            } else {
                write!(f, "({:.6}{:+.6}i)x^{}", c.re, c.im, k)?;
            }
        }
        Ok(())
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn arithmetic_round_trip() {
        let p = Poly::new(vec![cr(1.0), cr(-3.0), cr(2.0)]); // 2x^2 - 3x + 1
        let q = Poly::new(vec![cr(-1.0), cr(1.0)]); // x - 1
        let (quot, rem) = p.div_rem(&q);
        assert!(rem.is_zero());
        assert_eq!(quot.degree(), 1);
        let back = &(&quot * &q) + &rem;
        for k in 0..3 {
            assert_abs_diff_eq!((back.coeff(k) - p.coeff(k)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn roots_of_cubic() {
        // x^3 - x has roots -1, 0, 1.
        let p = Poly::new(vec![cr(0.0), cr(-1.0), cr(0.0), cr(1.0)]);
        let rs = p.roots();
        assert_eq!(rs.len(), 3);
        assert_abs_diff_eq!((rs[0] - cr(-1.0)).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rs[1].norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((rs[2] - cr(1.0)).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn roots_of_complex_poly() {
        let roots = vec![c(0.3, 1.2), c(-1.1, 0.4), c(2.0, -0.7), c(0.0, -2.0)];
        let p = Poly::from_roots(&roots);
        let mut found = p.roots();
        let mut expect = roots.clone();
        expect.sort_by(|a, b| crate::lex_cmp(*a, *b));
        found.sort_by(|a, b| crate::lex_cmp(*a, *b));
        for (a, b) in found.iter().zip(expect.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn deflate_matches_div_rem() {
        let p = Poly::from_roots(&[cr(2.0), c(1.0, 1.0), cr(-0.5)]);
        let q = p.deflate(cr(2.0));
        let expect = Poly::from_roots(&[c(1.0, 1.0), cr(-0.5)]);
        for k in 0..3 {
            assert_abs_diff_eq!((q.coeff(k) - expect.coeff(k)).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn squarefree_detection() {
        let sf = Poly::from_roots(&[cr(0.0), cr(1.0), cr(-1.0)]);
        assert!(sf.is_squarefree(1e-6));
        let not = Poly::from_roots(&[cr(1.0), cr(1.0), cr(-1.0)]);
        assert!(!not.is_squarefree(1e-6));
    }
}
