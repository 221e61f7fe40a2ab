use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Default relative tolerance for coefficient equality.
pub const DEFAULT_COEFF_TOL: f64 = 1e-9;

/// Values of `|den(jω)|` below this fraction of the evaluation scale are treated
/// as an imaginary-axis pole.
const POLE_ON_GRID_TOL: f64 = 1e-12;

/// Real-coefficient rational transfer function `num(s) / den(s)`.
///
/// Stored with a monic denominator so that two transfer functions with the
/// same coefficients compare equal. No pole-zero cancellation is ever done
/// implicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalTf {
    num: Polynomial,
    den: Polynomial,
}

impl RationalTf {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument(
                "transfer function denominator is the zero polynomial".into(),
            ));
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Polynomial, den: Polynomial) -> Self {
        let lead = den.leading();
        RationalTf {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        }
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn constant(k: f64) -> Self {
        Self::canonical(Polynomial::constant(k), Polynomial::constant(1.0))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `k / s`
    pub fn integrator(k: f64) -> Self {
        Self::canonical(Polynomial::constant(k), Polynomial::s())
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    /// Value at `s = 0`; infinite when there is a pole at the origin.
    pub fn dc_gain(&self) -> f64 {
        let d = self.den.coeff(0);
        let n = self.num.coeff(0);
        if d == 0.0 {
            if n == 0.0 {
                f64::NAN
            } else {
                f64::INFINITY * n.signum()
            }
        } else {
            n / d
        }
    }

    pub fn scale(&self, k: f64) -> RationalTf {
        RationalTf {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn div(&self, rhs: &RationalTf) -> Result<RationalTf> {
        if rhs.is_zero() {
            return Err(Error::InvalidArgument("division by the zero transfer function".into()));
        }
        RationalTf::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    /// Unity negative feedback around `self`: `L / (1 + L)`.
    pub fn feedback(&self) -> Result<RationalTf> {
        let den = &self.den + &self.num;
        if den.is_zero() {
            return Err(Error::DegenerateLoop);
        }
        RationalTf::new(self.num.clone(), den)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    /// `tf(jω)` for each sample. Fails on the first sample that lands on an
    /// imaginary-axis pole.
    pub fn freq_response(&self, omegas: &[f64]) -> Result<Vec<Complex64>> {
        omegas.iter().map(|&w| self.response_at(w)).collect()
    }

    pub fn response_at(&self, omega: f64) -> Result<Complex64> {
        let s = Complex64::new(0.0, omega);
        let d = self.den.eval(s);
        if d.norm() <= POLE_ON_GRID_TOL * self.den.eval_scale(s) {
            return Err(Error::PoleOnGrid { omega });
        }
        Ok(self.num.eval(s) / d)
    }

    pub fn approx_eq(&self, other: &RationalTf, rel_tol: f64) -> bool {
        self.num.approx_eq(&other.num, rel_tol) && self.den.approx_eq(&other.den, rel_tol)
    }
}

impl fmt::Display for RationalTf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

impl Add for &RationalTf {
    type Output = RationalTf;
    fn add(self, rhs: &RationalTf) -> RationalTf {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalTf::canonical(num, &self.den * &rhs.den)
    }
}

impl Sub for &RationalTf {
    type Output = RationalTf;
    fn sub(self, rhs: &RationalTf) -> RationalTf {
        let num = &(&self.num * &rhs.den) - &(&rhs.num * &self.den);
        RationalTf::canonical(num, &self.den * &rhs.den)
    }
}

impl Mul for &RationalTf {
    type Output = RationalTf;
    fn mul(self, rhs: &RationalTf) -> RationalTf {
        RationalTf::canonical(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrator_times_gain() {
        let k = RationalTf::constant(3.5);
        let l = &RationalTf::integrator(1.0) * &k;
        assert_eq!(l, RationalTf::integrator(3.5));
    }

    #[test]
    fn self_subtraction_is_zero() {
        let a = RationalTf::from_coeffs(&[1.0, 2.0], &[3.0, 1.0, 1.0]).unwrap();
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn canonical_scaling() {
        let a = RationalTf::from_coeffs(&[2.0], &[4.0, 2.0]).unwrap();
        assert_eq!(a.den().coeffs(), &[2.0, 1.0]);
        assert_eq!(a.num().coeffs(), &[1.0]);
        assert!(RationalTf::from_coeffs(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn unit_integrator_feedback() {
        let cl = RationalTf::integrator(1.0).feedback().unwrap();
        assert_eq!(cl, RationalTf::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap());
    }

    #[test]
    fn feedback_of_integrating_loop_has_unit_dc_gain() {
        let l = RationalTf::from_coeffs(&[0.3, 0.1], &[0.0, 2.0, 1.0, 0.5]).unwrap();
        assert_eq!(l.feedback().unwrap().dc_gain(), 1.0);
    }

    #[test]
    fn degenerate_feedback() {
        let l = RationalTf::constant(-1.0);
        assert_eq!(l.feedback(), Err(Error::DegenerateLoop));
    }

    #[test]
    fn integrator_response() {
        let h = RationalTf::integrator(1.0).response_at(1.0).unwrap();
        assert!((h.norm() - 1.0).abs() < 1e-15);
        assert!((h.arg().to_degrees() + 90.0).abs() < 1e-12);
    }

    #[test]
    fn pole_on_grid_is_reported() {
        let tf = RationalTf::from_coeffs(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        let err = tf.freq_response(&[0.5, 1.0, 2.0]).unwrap_err();
        assert_eq!(err, Error::PoleOnGrid { omega: 1.0 });
        assert_eq!(
            RationalTf::integrator(1.0).response_at(0.0),
            Err(Error::PoleOnGrid { omega: 0.0 })
        );
    }

    #[test]
    fn high_pass_asymptote() {
        let hp = RationalTf::from_coeffs(&[0.0, 0.7], &[0.1, 1.0]).unwrap();
        assert_eq!(hp.response_at(0.0).unwrap().norm(), 0.0);
        assert!((hp.response_at(1e9).unwrap().norm() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn division() {
        let a = RationalTf::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
        let q = a.div(&a).unwrap();
        assert_eq!(q.eval(Complex64::new(0.3, 0.2)), Complex64::new(1.0, 0.0));
        assert!(a.div(&RationalTf::zero()).is_err());
    }
}
