//! Closed-form eigenpairs of the quadratic problem R(x) = x + (x² − 1)/(2C).

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Arithmetic–geometric mean of two positive numbers.
pub fn agm(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::DomainError(format!("agm needs positive arguments, got ({a}, {b})")));
    }
    let (mut x, mut y) = (a, b);
    for _ in 0..64 {
        if (x - y).abs() <= 1e-16 * x.max(y) {
            break;
        }
        let (nx, ny) = (0.5 * (x + y), (x * y).sqrt());
        x = nx;
        y = ny;
    }
    Ok(0.5 * (x + y))
}

/// Complete elliptic integral of the first kind, K(k) = π / (2 agm(1, k′)).
pub fn ellip_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::DomainError(format!("modulus {k} outside [0, 1)")));
    }
    Ok(PI / (2.0 * agm(1.0, (1.0 - k * k).sqrt())?))
}

/// K(k) and K′(k) = K(√(1 − k²)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticValues {
    pub k: f64,
    pub kk: f64,
    pub kk_prime: f64,
}

impl EllipticValues {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::DomainError(format!("modulus {k} outside (0, 1)")));
        }
        Ok(EllipticValues { k, kk: ellip_k(k)?, kk_prime: PI / (2.0 * agm(1.0, k)?) })
    }
}

/// The quadratic problem with parameter C > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProblem {
    pub c: f64,
    pub k: f64,
    pub tau: f64,
    pub ell: EllipticValues,
}

const GL_POINTS: usize = 48;

impl QuadraticProblem {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::DomainError(format!("C must exceed 1, got {c}")));
        }
        let k = (c - 1.0) / (c + 1.0);
        let ell = EllipticValues::new(k)?;
        Ok(QuadraticProblem { c, k, tau: ell.kk / ell.kk_prime, ell })
    }

    /// λ_n = 1 + 1/cosh(2πτn).
    pub fn lambda_n(&self, n: usize) -> f64 {
        1.0 + 1.0 / (2.0 * PI * self.tau * n as f64).cosh()
    }

    /// F(X) = ∫₁^X ds / √((s² − 1)(1 − k² s²)) for X ∈ [1, 1/k].
    pub fn incomplete(&self, big_x: f64) -> f64 {
        let k = self.k;
        let top = 1.0 / k;
        let x = big_x.clamp(1.0, top);
        let (nodes, weights) = gauss_legendre(GL_POINTS);
        let mid = 0.5 * (1.0 + top);
        if x <= mid {
            // s = 1 + σ², σ ∈ [0, √(X − 1)]
            let half = 0.5 * (x - 1.0).sqrt();
            nodes
                .iter()
                .zip(&weights)
                .map(|(&z, &w)| {
                    let sg = half * (z + 1.0);
                    let s = 1.0 + sg * sg;
                    w * half * 2.0 / ((2.0 + sg * sg).sqrt() * (1.0 - k * k * s * s).sqrt())
                })
                .sum()
        } else {
            // s = 1/k − ρ², ρ ∈ [0, √(1/k − X)]
            let half = 0.5 * (top - x).sqrt();
            let tail: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&z, &w)| {
                    let r = half * (z + 1.0);
                    let s = top - r * r;
                    w * half * 2.0 / ((s * s - 1.0).sqrt() * (k * (1.0 + k * s)).sqrt())
                })
                .sum();
            self.ell.kk_prime - tail
        }
    }

    /// u_n(x) = sin[(nπ/K′) F((C + x)/(C − 1))].
    pub fn u_n_reference(&self, n: usize, x: f64) -> f64 {
        let big_x = (self.c + x) / (self.c - 1.0);
        (n as f64 * PI / self.ell.kk_prime * self.incomplete(big_x)).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agm_basics() {
        assert_eq!(agm(1.0, 1.0).unwrap(), 1.0);
        let (a, b) = (1.0, 0.3);
        let one = agm(a, b).unwrap();
        let two = agm(0.5 * (a + b), (a * b).sqrt()).unwrap();
        assert!((one - two).abs() < 1e-15);
        assert!(agm(-1.0, 1.0).is_err());
        assert!((ellip_k(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn full_integral_equals_k_prime() {
        for c in [2.0, 3.0, 5.0] {
            let q = QuadraticProblem::new(c).unwrap();
            assert!((q.incomplete(1.0 / q.k) - q.ell.kk_prime).abs() < 1e-10);
            assert!(q.u_n_reference(2, -1.0).abs() < 1e-15);
            assert!(q.u_n_reference(3, 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn both_branches_agree_at_midpoint() {
        let q = QuadraticProblem::new(3.0).unwrap();
        let mid = 0.5 * (1.0 + 1.0 / q.k);
        let lo = q.incomplete(mid - 1e-9);
        let hi = q.incomplete(mid + 1e-9);
        assert!((lo - hi).abs() < 1e-8);
    }

    #[test]
    fn lambda_monotone_below_two() {
        let q = QuadraticProblem::new(3.0).unwrap();
        let mut prev = 2.0;
        for n in 1..6 {
            let l = q.lambda_n(n);
            assert!(l < prev && l > 1.0);
            prev = l;
        }
    }
}
