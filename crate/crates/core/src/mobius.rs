//! Real linear-fractional maps of the extended real line.
//!
//! Points at infinity are written as `f64::INFINITY`; the sign of an infinite
//! value carries no meaning.

use crate::error::{Error, Result};
use crate::poly::Ext;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// x ↦ (a x + b) / (c x + d) with ad − bc ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
        if !(scale.is_finite()) || scale == 0.0 || m.det().abs() <= 1e-14 * scale * scale {
            return Err(Error::InvalidInput(format!("degenerate Mobius coefficients ({a}, {b}, {c}, {d})")));
        }
        Ok(m.normalized())
    }

    pub fn identity() -> Self {
        Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    fn normalized(self) -> Self {
        let s = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs());
        Mobius { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }

    /// Orientation of the real line is preserved iff the determinant is positive.
    pub fn preserves_orientation(&self) -> bool {
        self.det() > 0.0
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return if self.c == 0.0 { f64::INFINITY } else { self.a / self.c };
        }
        let den = self.c * x + self.d;
        if den == 0.0 {
            f64::INFINITY
        } else {
            (self.a * x + self.b) / den
        }
    }

    pub fn apply_ext(&self, z: Ext) -> Ext {
        match z {
            Ext::Infinity => {
                if self.c == 0.0 {
                    Ext::Infinity
                } else {
                    Ext::real(self.a / self.c)
                }
            }
            Ext::Finite(z) => {
                let den = z * self.c + self.d;
                if den.norm() == 0.0 {
                    Ext::Infinity
                } else {
                    Ext::Finite((z * self.a + self.b) / den)
                }
            }
        }
    }

    pub fn apply_c(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .normalized()
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }.normalized()
    }

    /// Map sending z₁, z₂, z₃ to 0, 1, ∞.
    fn to_standard(z: [f64; 3]) -> Result<Mobius> {
        let [z1, z2, z3] = z;
        let distinct = |p: f64, q: f64| !(p.is_infinite() && q.is_infinite()) && p != q;
        if !(distinct(z1, z2) && distinct(z2, z3) && distinct(z1, z3)) {
            return Err(Error::InvalidInput("three points must be distinct".into()));
        }
        let (a, b, c, d) = if z1.is_infinite() {
            (0.0, z2 - z3, 1.0, -z3)
        } else if z2.is_infinite() {
            (1.0, -z1, 1.0, -z3)
        } else if z3.is_infinite() {
            (1.0, -z1, 0.0, z2 - z1)
        } else {
            (z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))
        };
        Mobius::new(a, b, c, d)
    }

    /// The unique real Möbius map with z[i] ↦ w[i].
    pub fn from_three_points(z: [f64; 3], w: [f64; 3]) -> Result<Mobius> {
        let sz = Self::to_standard(z)?;
        let sw = Self::to_standard(w)?;
        Ok(sw.inverse().compose(&sz))
    }

    /// True when the map sends [−1, 1] onto itself.
    pub fn preserves_unit_interval(&self) -> bool {
        let lo = self.apply(-1.0);
        let hi = self.apply(1.0);
        let mid = self.apply(0.0);
        let end_ok = |v: f64| v.is_finite() && ((v - 1.0).abs() < 1e-12 || (v + 1.0).abs() < 1e-12);
        end_ok(lo) && end_ok(hi) && (lo - hi).abs() > 1.0 && mid.is_finite() && mid.abs() < 1.0
    }

    /// Hyperbolic automorphism of [−1, 1] fixing both endpoints, optionally
    /// followed by the reflection x ↦ −x.
    pub fn interval_automorphism(s: f64, reflect: bool) -> Result<Mobius> {
        if !(s.abs() < 1.0) {
            return Err(Error::InvalidGauge(format!("parameter {s} outside (-1, 1)")));
        }
        let m = Mobius::new(1.0, s, s, 1.0)?;
        Ok(if reflect { Mobius::new(-1.0, 0.0, 0.0, 1.0)?.compose(&m) } else { m })
    }
}

/// Cross-ratio (z₁, z₂; z₃, z₄) = (z₁−z₃)(z₂−z₄) / ((z₁−z₄)(z₂−z₃)).
pub fn cross_ratio(z1: f64, z2: f64, z3: f64, z4: f64) -> f64 {
    Mobius::from_three_points([z2, z3, z4], [1.0, 0.0, f64::INFINITY]).map(|m| m.apply(z1)).unwrap_or(f64::NAN)
}
