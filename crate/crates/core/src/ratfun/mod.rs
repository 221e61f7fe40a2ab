//! Real-coefficient polynomial and rational transfer-function algebra.
//!
//! The Laplace variable is dimensionless per-unit frequency: `s = 1j` is the
//! nominal grid frequency. Multiply by the base angular speed to get rad/s.

mod poly;
mod rational;
mod roots;

pub use poly::Polynomial;
pub use rational::{RationalTf, DEFAULT_COEFF_TOL};
pub use roots::poly_roots;

/// Log-spaced grid of `n` points between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}
