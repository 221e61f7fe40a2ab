//! Polynomial root finding.
//!
//! Degrees one to three are solved in closed form (the cubic through the
//! discriminant split into the trigonometric and Cardano branches). Higher
//! degrees go through the eigenvalues of the companion matrix. Every root is
//! then polished with a few guarded Newton steps on the original polynomial and
//! conjugate pairs are symmetrized.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly::{require_degree, Polynomial};
use crate::error::Result;

const NEWTON_STEPS: usize = 4;

pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    require_degree(p, 1)?;
    let m = p.monic();
    let c = m.coeffs();
    let raw = match p.degree() {
        1 => vec![Complex64::new(-c[0], 0.0)],
        2 => quadratic(c[1], c[0]).to_vec(),
        3 => cubic(c[2], c[1], c[0]).to_vec(),
        _ => companion_eigenvalues(&m),
    };
    let mut roots: Vec<Complex64> = raw.into_iter().map(|r| polish(p, r)).collect();
    symmetrize_conjugates(&mut roots);
    Ok(roots)
}

/// Roots of `x^2 + b x + c` without cancellation in the real branch.
fn quadratic(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum_or_one() * disc.sqrt());
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Roots of the monic cubic `x^3 + a x^2 + b x + c`.
fn cubic(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    // depressed form t^3 + p t + q with x = t - a/3
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let d = half_q * half_q + third_p * third_p * third_p;

    if d < 0.0 {
        // three distinct real roots, p < 0 here
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos() / 3.0;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let t = 2.0 * r * (phi - 2.0 * PI * k as f64 / 3.0).cos();
            *slot = Complex64::new(t - shift, 0.0);
        }
        return out;
    }

    // one real root (or a repeated one); pick the cube-root branch that avoids
    // cancellation
    let u3 = -half_q - half_q.signum_or_one() * d.sqrt();
    let u = u3.cbrt();
    let t = if u == 0.0 { 0.0 } else { u - third_p / u };
    let x1 = newton_real(&[c, b, a, 1.0], t - shift);

    // deflate to x^2 + e1 x + e0
    let e1 = a + x1;
    let e0 = if x1.abs() > 1e-8 * (1.0 + c.abs()).sqrt() {
        -c / x1
    } else {
        b + e1 * x1
    };
    let [r2, r3] = quadratic(e1, e0);
    [Complex64::new(x1, 0.0), r2, r3]
}

fn newton_real(coeffs: &[f64; 4], mut x: f64) -> f64 {
    let p = Polynomial::new(coeffs.to_vec());
    let dp = p.derivative();
    for _ in 0..NEWTON_STEPS {
        let f = p.eval_real(x);
        let df = dp.eval_real(x);
        if df == 0.0 {
            break;
        }
        let next = x - f / df;
        if p.eval_real(next).abs() < f.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

fn companion_eigenvalues(monic: &Polynomial) -> Vec<Complex64> {
    let n = monic.degree();
    let c = monic.coeffs();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Newton refinement that only accepts steps which reduce the residual.
fn polish(p: &Polynomial, mut z: Complex64) -> Complex64 {
    let dp = p.derivative();
    let mut fz = p.eval(z).norm();
    for _ in 0..NEWTON_STEPS {
        if fz == 0.0 {
            break;
        }
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - p.eval(z) / d;
        let fnext = p.eval(next).norm();
        if fnext < fz {
            z = next;
            fz = fnext;
        } else {
            break;
        }
    }
    z
}

/// Forces exact conjugate symmetry: near-real roots become real and each root
/// in the upper half-plane is paired with its nearest lower-half partner.
fn symmetrize_conjugates(roots: &mut [Complex64]) {
    let scale = roots.iter().fold(1.0_f64, |m, r| m.max(r.norm()));
    let real_tol = 1e-12 * scale;
    for r in roots.iter_mut() {
        if r.im.abs() <= real_tol {
            r.im = 0.0;
        }
    }
    let upper: Vec<usize> = (0..roots.len()).filter(|&i| roots[i].im > 0.0).collect();
    let mut lower: Vec<usize> = (0..roots.len()).filter(|&i| roots[i].im < 0.0).collect();
    for &u in &upper {
        let target = roots[u].conj();
        let best = lower
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| {
                (roots[a] - target)
                    .norm()
                    .total_cmp(&(roots[b] - target).norm())
            })
            .map(|(pos, &idx)| (pos, idx));
        if let Some((pos, l)) = best {
            let re = 0.5 * (roots[u].re + roots[l].re);
            let im = 0.5 * (roots[u].im - roots[l].im);
            roots[u] = Complex64::new(re, im);
            roots[l] = Complex64::new(re, -im);
            lower.swap_remove(pos);
        }
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn degree_zero_is_rejected() {
        assert!(poly_roots(&Polynomial::constant(3.0)).is_err());
        assert!(poly_roots(&Polynomial::zero()).is_err());
    }

    #[test]
    fn unit_circle_pair() {
        let r = sorted(poly_roots(&Polynomial::new(vec![1.0, 0.0, 1.0])).unwrap());
        assert_eq!(r[0], Complex64::new(0.0, -1.0));
        assert_eq!(r[1], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn factored_cubic() {
        let r = sorted(poly_roots(&Polynomial::new(vec![6.0, 11.0, 6.0, 1.0])).unwrap());
        for (got, want) in r.iter().zip([-3.0, -2.0, -1.0]) {
            assert!((got.re - want).abs() < 1e-12, "{got}");
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn cubic_with_complex_pair() {
        // (s + 2)(s^2 - 0.2 s + 1.01): roots -2, 0.1 +- j
        let p = Polynomial::new(vec![2.02, 0.61, 1.8, 1.0]);
        let r = sorted(poly_roots(&p).unwrap());
        assert!((r[0].re + 2.0).abs() < 1e-12);
        assert!((r[1].re - 0.1).abs() < 1e-12 && (r[1].im + 1.0).abs() < 1e-12);
        assert_eq!(r[1], r[2].conj());
    }

    #[test]
    fn repeated_and_zero_roots() {
        let r = poly_roots(&Polynomial::new(vec![0.0, 0.0, 0.0, 2.0])).unwrap();
        assert!(r.iter().all(|z| z.norm() < 1e-12));
        let r = sorted(poly_roots(&Polynomial::new(vec![-1.0, 3.0, -3.0, 1.0])).unwrap());
        assert!(r.iter().all(|z| (z - 1.0).norm() < 1e-4));
    }

    #[test]
    fn quartic_and_quintic_via_companion() {
        let want = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(-0.5, 2.0),
            Complex64::new(-0.5, -2.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        for n in [4, 5] {
            let p = Polynomial::from_roots(&want[..n]);
            let got = sorted(poly_roots(&p).unwrap());
            let exp = sorted(want[..n].to_vec());
            for (g, e) in got.iter().zip(&exp) {
                assert!((g - e).norm() < 1e-10, "{g} vs {e}");
            }
        }
    }

    #[test]
    fn scaled_leading_coefficient() {
        // -2 (s - 1)(s - 4) = -2 s^2 + 10 s - 8
        let r = sorted(poly_roots(&Polynomial::new(vec![-8.0, 10.0, -2.0])).unwrap());
        assert!((r[0].re - 1.0).abs() < 1e-14 && (r[1].re - 4.0).abs() < 1e-14);
    }
}
