//! Pairs of pants with three coloured real slots, their cross-ratio moduli,
//! the circle C and lines ε·ℝ̂, ε²·ℝ̂ attached to λ, sewing descriptors and
//! the Riemann–Hurwitz counting identities.

use crate::error::{Error, Result};
use crate::mobius::Mobius;
use crate::monodromy::epsilon;
use crate::poly::Ext;
use crate::rational_map::{cyclic_angle, validate_ps3_component, RationalMap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotColor {
    Red,
    Blue,
    Green,
}

/// A closed arc of ℝ̂ running in the positive direction from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub color: SlotColor,
    pub lo: f64,
    pub hi: f64,
}

impl Slot {
    fn span(&self) -> f64 {
        (cyclic_angle(self.hi) - cyclic_angle(self.lo)).rem_euclid(2.0 * std::f64::consts::PI)
    }

    /// Closed-arc membership.
    pub fn contains(&self, x: f64) -> bool {
        let t = (cyclic_angle(x) - cyclic_angle(self.lo)).rem_euclid(2.0 * std::f64::consts::PI);
        t <= self.span()
    }

    /// Point of the arc at fraction `t` of its angular length.
    pub fn point_at(&self, t: f64) -> f64 {
        (0.5 * (cyclic_angle(self.lo) + t * self.span())).tan()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PantsClass {
    pub red: Slot,
    pub blue: Slot,
    pub green: Slot,
}

fn close(x: f64, y: f64) -> bool {
    Ext::real_or_inf(x).chordal(Ext::real_or_inf(y)) < 1e-12
}

impl PantsClass {
    pub fn new(red: (f64, f64), blue: (f64, f64), green: (f64, f64)) -> Result<Self> {
        let p = PantsClass {
            red: Slot { color: SlotColor::Red, lo: red.0, hi: red.1 },
            blue: Slot { color: SlotColor::Blue, lo: blue.0, hi: blue.1 },
            green: Slot { color: SlotColor::Green, lo: green.0, hi: green.1 },
        };
        let ends = p.endpoints();
        if ends.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidPants("NaN endpoint".into()));
        }
        for i in 0..6 {
            for j in (i + 1)..6 {
                if close(ends[i], ends[j]) {
                    return Err(Error::InvalidPants(format!("endpoints {} and {} coincide", ends[i], ends[j])));
                }
            }
        }
        let slots = p.slots();
        for i in 0..3 {
            for j in 0..3 {
                if i != j && (slots[i].contains(slots[j].lo) || slots[i].contains(slots[j].hi)) {
                    return Err(Error::InvalidPants(format!(
                        "{:?} and {:?} slots overlap",
                        slots[i].color, slots[j].color
                    )));
                }
            }
        }
        Ok(p)
    }

    pub fn slots(&self) -> [Slot; 3] {
        [self.red, self.blue, self.green]
    }

    /// (r₁, r₂, a₁, a₂, a₃, a₄).
    pub fn endpoints(&self) -> [f64; 6] {
        [self.red.lo, self.red.hi, self.blue.lo, self.blue.hi, self.green.lo, self.green.hi]
    }

    /// Image under an orientation-preserving real Möbius map.
    pub fn transform(&self, l: &Mobius) -> Result<PantsClass> {
        if !l.preserves_orientation() {
            return Err(Error::InvalidInput("pants transform must preserve orientation".into()));
        }
        let e = self.endpoints().map(|x| l.apply(x));
        PantsClass::new((e[0], e[1]), (e[2], e[3]), (e[4], e[5]))
    }
}

/// Pants of a map in the PS-3 component: red [−1, 1], blue (a₁, a₂), green (a₃, a₄).
pub fn pants_of(r: &RationalMap) -> Result<PantsClass> {
    let report = validate_ps3_component(r);
    if !report.passed() {
        return Err(Error::InvalidPants(report.failures.join("; ")));
    }
    let s = r.critical_structure().map_err(|e| Error::InvalidPants(e.to_string()))?;
    PantsClass::new((-1.0, 1.0), (s.a[0], s.a[1]), (s.a[2], s.a[3]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuliTriple(pub [f64; 3]);

/// Normalizes (r₁, r₂, a₁) to (−1, 1, 0); the images of a₂, a₃, a₄ are the
/// moduli.
pub fn moduli(p: &PantsClass) -> ModuliTriple {
    let e = p.endpoints();
    let m = Mobius::from_three_points([e[0], e[1], e[2]], [-1.0, 1.0, 0.0]).expect("pants endpoints are distinct");
    ModuliTriple([m.apply(e[3]), m.apply(e[4]), m.apply(e[5])])
}

impl ModuliTriple {
    /// Componentwise comparison with relative tolerance 1e−8.
    pub fn approx_eq(&self, other: &ModuliTriple) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(&x, &y)| {
            if x.is_infinite() || y.is_infinite() || x.abs() > 1e12 || y.abs() > 1e12 {
                close(x, y) || Ext::real_or_inf(x).chordal(Ext::real_or_inf(y)) < 1e-8
            } else {
                (x - y).abs() <= 1e-8 * x.abs().max(y.abs()).max(1.0)
            }
        })
    }

    pub fn max_deviation(&self, other: &ModuliTriple) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
            .fold(0.0, f64::max)
    }
}

pub fn equivalent(p: &PantsClass, q: &PantsClass) -> bool {
    moduli(p).approx_eq(&moduli(q))
}

/// Circle C = {|p − μ⁻¹|² = μ⁻² − 1} and the lines ε·ℝ̂, ε²·ℝ̂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleData {
    pub lambda: f64,
    /// μ when it is real and positive.
    pub mu: Option<f64>,
    pub center: Option<f64>,
    pub radius_squared: Option<f64>,
    pub radius: Option<f64>,
    /// Distance from the center to either line minus the radius.
    pub certificate: Option<f64>,
    pub line_directions: [Complex64; 2],
}

pub fn circle_data(lambda: f64) -> CircleData {
    let eps = epsilon();
    let mu2 = (3.0 - lambda) / (2.0 * lambda);
    let mut out = CircleData {
        lambda,
        mu: None,
        center: None,
        radius_squared: None,
        radius: None,
        certificate: None,
        line_directions: [eps, eps * eps],
    };
    if !(lambda.is_finite() && mu2 > 0.0 && lambda > 0.0) {
        return out;
    }
    let mu = mu2.sqrt();
    let center = 1.0 / mu;
    let r2 = 1.0 / mu2 - 1.0;
    out.mu = Some(mu);
    out.center = Some(center);
    out.radius_squared = Some(r2);
    if r2 >= 0.0 {
        let r = r2.sqrt();
        out.radius = Some(r);
        out.certificate = Some(center * (std::f64::consts::PI / 3.0).sin() - r);
    }
    out
}

impl CircleData {
    pub fn disjoint(&self) -> bool {
        self.certificate.is_some_and(|c| c > 0.0)
    }

    /// Outside C and on the centre's side of both lines.
    pub fn in_alpha_intersection(&self, h: Complex64) -> bool {
        let (Some(c), Some(r)) = (self.center, self.radius) else {
            return false;
        };
        let side = |e: Complex64, z: Complex64| (e.conj() * z).im;
        let center = Complex64::new(c, 0.0);
        (h - center).norm() > r && self.line_directions.iter().all(|&e| side(e, h) * side(e, center) > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fashion {
    #[serde(rename = "1")]
    S1,
    #[serde(rename = "2")]
    S2,
    #[serde(rename = "3")]
    S3,
    #[serde(rename = "12")]
    S12,
    #[serde(rename = "13")]
    S13,
}

impl Fashion {
    pub fn value(self) -> u32 {
        match self {
            Fashion::S1 => 1,
            Fashion::S2 => 2,
            Fashion::S3 => 3,
            Fashion::S12 => 12,
            Fashion::S13 => 13,
        }
    }
}

/// Bookkeeping record for a sewn pants 𝒫ₛ(λ, h₁, h₂ | m₁, m₂). The surface
/// itself is never constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SewingDescriptor {
    pub fashion: Fashion,
    pub h1: Option<f64>,
    pub h2: Option<f64>,
    pub m1: u32,
    pub m2: u32,
}

pub fn predicted_zero_count(d: &SewingDescriptor) -> u32 {
    match d.fashion {
        Fashion::S1 => d.m1 + d.m2 + 3,
        Fashion::S2 | Fashion::S3 => d.m1 + d.m2 + 2,
        // 12 is fashion 2 with m₂ + 1, 13 is fashion 3 with m₁ + 1
        Fashion::S12 | Fashion::S13 => d.m1 + d.m2 + 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannHurwitzReport {
    pub n: u32,
    pub interior_branch: bool,
    pub d_r: u32,
    pub d_g: u32,
    pub d_b: u32,
    pub d_b_minus: Option<u32>,
}

/// Interior case: d_r + d_g + d_b = 2N with d_r = d_g + d_b = N.
/// Boundary case: d_b is read as d_b⁺, d_b⁻ = 1 and N = d_r + 1.
pub fn riemann_hurwitz_check(d_r: u32, d_g: u32, d_b: u32, interior_branch: bool) -> Result<RiemannHurwitzReport> {
    if interior_branch {
        if d_r == 0 || d_r != d_g + d_b {
            return Err(Error::CountingViolation(format!("d_r = {d_r} but d_g + d_b = {}", d_g + d_b)));
        }
        Ok(RiemannHurwitzReport { n: d_r, interior_branch, d_r, d_g, d_b, d_b_minus: None })
    } else {
        riemann_hurwitz_boundary(d_r, d_g, d_b, 1, d_r + 1)
    }
}

/// d_r + d_g + d_b⁺ + d_b⁻ = 2N with d_b⁻ = 1.
pub fn riemann_hurwitz_boundary(d_r: u32, d_g: u32, d_plus: u32, d_minus: u32, n: u32) -> Result<RiemannHurwitzReport> {
    if d_minus != 1 {
        return Err(Error::CountingViolation(format!("d⁻ = {d_minus}, expected 1")));
    }
    if d_r + d_g + d_plus + d_minus != 2 * n {
        return Err(Error::CountingViolation(format!("{d_r} + {d_g} + {d_plus} + {d_minus} != 2·{n}")));
    }
    Ok(RiemannHurwitzReport { n, interior_branch: false, d_r, d_g, d_b: d_plus, d_b_minus: Some(d_minus) })
}

/// Branch points {−1, 1, a₁, …, a₄} of the double of the pants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperellipticData {
    pub branch_points: [f64; 6],
}

impl HyperellipticData {
    pub fn from_pants(p: &PantsClass) -> Self {
        HyperellipticData { branch_points: p.endpoints() }
    }

    pub fn matches(&self, p: &PantsClass) -> bool {
        self.branch_points.iter().zip(p.endpoints().iter()).all(|(&x, &y)| close(x, y))
    }
}
