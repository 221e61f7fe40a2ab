use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real-coefficient polynomial in the per-unit Laplace variable, stored in
/// ascending degree order.
///
/// Trailing (highest-degree) zero coefficients are trimmed on construction, so
/// the leading coefficient is nonzero except for the zero polynomial, which is
/// represented as the single coefficient `[0.0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The polynomial `s`.
    pub fn s() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    /// Monic product of `(s - r)` over the given roots. Complex roots must come
    /// in conjugate pairs for the result to be real; any residual imaginary
    /// part is dropped.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, &c) in acc.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            acc = next;
        }
        Polynomial::new(acc.into_iter().map(|c| c.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Coefficient of `s^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Sum of `|c_k| |s|^k`; the natural scale for judging whether a value of
    /// `eval(s)` is numerically zero.
    pub fn eval_scale(&self, s: Complex64) -> f64 {
        let r = s.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * r + c.abs())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn powi(&self, n: u32) -> Polynomial {
        (0..n).fold(Polynomial::constant(1.0), |acc, _| &acc * self)
    }

    /// Divides through by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        let lead = self.leading();
        if lead == 0.0 {
            return self.clone();
        }
        self.scale(1.0 / lead)
    }

    /// Coefficient-wise comparison relative to the larger coefficient magnitude
    /// of the two operands.
    pub fn approx_eq(&self, other: &Polynomial, rel_tol: f64) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        if scale == 0.0 {
            return true;
        }
        (0..n).all(|k| (self.coeff(k) - other.coeff(k)).abs() <= rel_tol * scale)
    }

    /// All `degree()` roots, counted with multiplicity.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        super::roots::poly_roots(self)
    }

    /// Quotient of synthetic division by `(s - r)`; the remainder is dropped.
    pub fn deflate_real(&self, r: f64) -> Polynomial {
        let n = self.degree();
        let mut q = vec![0.0; n];
        let mut acc = 0.0;
        for k in (1..=n).rev() {
            acc = acc * r + self.coeffs[k];
            q[k - 1] = acc;
        }
        Polynomial::new(q)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a} s")?,
                _ => write!(f, "{a} s^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Rejects polynomials of degree zero for operations that need at least one root.
pub(crate) fn require_degree(p: &Polynomial, min: usize) -> Result<()> {
    if p.degree() < min {
        return Err(Error::InvalidArgument(format!(
            "polynomial of degree {} has no roots",
            p.degree()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let p = Polynomial::new(vec![1.0, 0.0, 1.0]);
        assert_eq!(p.eval(c(0.0, 1.0)), c(0.0, 0.0));
        assert_eq!(p.eval(c(0.0, 0.0)), c(1.0, 0.0));
        assert_eq!(p.eval(c(1.0, 1.0)), c(1.0, 2.0));
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
        assert!(Polynomial::new(vec![]).is_zero());
    }

    #[test]
    fn arithmetic() {
        let a = Polynomial::new(vec![1.0, 1.0]);
        let b = Polynomial::new(vec![2.0, 1.0]);
        assert_eq!((&a * &b).coeffs(), &[2.0, 3.0, 1.0]);
        assert!((&a - &a).is_zero());
        assert_eq!((&a + &b).coeffs(), &[3.0, 2.0]);
        assert_eq!(a.powi(2).coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(b.powi(0).coeffs(), &[1.0]);
    }

    #[test]
    fn derivative_and_deflation() {
        let p = Polynomial::new(vec![6.0, 11.0, 6.0, 1.0]);
        assert_eq!(p.derivative().coeffs(), &[11.0, 12.0, 3.0]);
        let q = p.deflate_real(-1.0);
        assert_eq!(q.coeffs(), &[6.0, 5.0, 1.0]);
    }

    #[test]
    fn from_roots_expands() {
        let p = Polynomial::from_roots(&[c(-1.0, 0.0), c(-2.0, 0.0), c(-3.0, 0.0)]);
        assert_eq!(p.coeffs(), &[6.0, 11.0, 6.0, 1.0]);
        let q = Polynomial::from_roots(&[c(0.0, 1.0), c(0.0, -1.0)]);
        assert_eq!(q.coeffs(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn display() {
        let p = Polynomial::new(vec![-1.0, 0.0, 2.0]);
        assert_eq!(p.to_string(), "2 s^2 - 1");
    }
}
