//! Dense univariate polynomials with real coefficients in ascending powers,
//! plus root finding for real or complex coefficient vectors.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ext {
    Finite(Complex64),
    Infinity,
}

impl Ext {
    pub fn real(x: f64) -> Self {
        Ext::Finite(Complex64::new(x, 0.0))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            Ext::Finite(z) => Some(z),
            Ext::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Ext::Infinity)
    }

    /// Chordal distance on the Riemann sphere (diameter normalized to 1).
    pub fn chordal(self, other: Ext) -> f64 {
        match (self, other) {
            (Ext::Infinity, Ext::Infinity) => 0.0,
            (Ext::Finite(z), Ext::Infinity) | (Ext::Infinity, Ext::Finite(z)) => 1.0 / (1.0 + z.norm_sqr()).sqrt(),
            (Ext::Finite(z), Ext::Finite(w)) => {
                (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
            }
        }
    }

    pub fn conj(self) -> Self {
        match self {
            Ext::Finite(z) => Ext::Finite(z.conj()),
            Ext::Infinity => Ext::Infinity,
        }
    }
}

/// Real polynomial, coefficients in ascending powers, no trailing zeros
/// except for the zero polynomial which is stored as `[0.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
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

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Coefficient of x^k, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(0.0);
        }
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, k: usize) -> Poly {
        (0..k).fold(Poly::constant(1.0), |acc, _| acc.mul(self))
    }

    /// Coefficients padded with zeros to length `n`.
    pub fn padded(&self, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.coeff(k)).collect()
    }

    /// All roots, with infinity standing in for the missing ones when the
    /// coefficients are read as a polynomial of formal degree `formal`.
    pub fn roots_ext(&self, formal: usize) -> Vec<Ext> {
        let c: Vec<Complex64> = self.padded(formal + 1).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        let mut r = roots_complex(&c);
        for z in r.iter_mut() {
            if let Ext::Finite(w) = z {
                if w.im.abs() < 1e-9 * (1.0 + w.re.abs()) {
                    *w = Complex64::new(w.re, 0.0);
                }
            }
        }
        r
    }

    /// Finite real roots (after snapping near-real roots), sorted ascending.
    pub fn real_roots(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .roots_ext(self.degree())
            .into_iter()
            .filter_map(|e| e.finite())
            .filter(|z| z.im == 0.0)
            .map(|z| z.re)
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// Roots of a polynomial with complex coefficients `c` (ascending powers).
/// The formal degree is `c.len() - 1`; leading coefficients that are
/// negligible relative to the largest one are treated as zero and the
/// corresponding roots are reported at infinity.
pub fn roots_complex(c: &[Complex64]) -> Vec<Ext> {
    let formal = c.len().saturating_sub(1);
    let scale = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut deg = formal;
    while deg > 0 && c[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    let mut out = Vec::with_capacity(formal);
    if deg > 0 {
        let lead = c[deg];
        let mut m = DMatrix::<Complex64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -c[i] / lead;
        }
        let eig = Schur::new(m).eigenvalues().expect("complex Schur form is triangular");
        for z in eig.iter() {
            out.push(Ext::Finite(polish(&c[..=deg], *z)));
        }
    }
    while out.len() < formal {
        out.push(Ext::Infinity);
    }
    out
}

fn horner_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// A few guarded Newton steps; a step is kept only when it reduces |p|.
fn polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
    let (mut p, _) = horner_with_derivative(c, z);
    for _ in 0..3 {
        let (_, dp) = horner_with_derivative(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = horner_with_derivative(c, cand);
        if pc.norm() < p.norm() {
            z = cand;
            p = pc;
        } else {
            break;
        }
    }
    z
}

/// Resultant of two real polynomials via the Sylvester determinant, after
/// scaling both to unit max-norm.
pub fn resultant(p: &Poly, q: &Poly) -> f64 {
    let (m, n) = (p.degree(), q.degree());
    if m + n == 0 {
        return 1.0;
    }
    let ps = p.scale(1.0 / p.max_abs().max(f64::MIN_POSITIVE));
    let qs = q.scale(1.0 / q.max_abs().max(f64::MIN_POSITIVE));
    let size = m + n;
    let mut s = DMatrix::<f64>::zeros(size, size);
    for row in 0..n {
        for k in 0..=m {
            s[(row, row + k)] = ps.coeff(m - k);
        }
    }
    for row in 0..m {
        for k in 0..=n {
            s[(n + row, row + k)] = qs.coeff(n - k);
        }
    }
    s.determinant()
}
