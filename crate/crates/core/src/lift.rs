//! Lift of a computed eigenfunction to the Cauchy transform Φ, the 3-vector
//! W(y) on the pants, the coordinates p±(y) and the diagnostics built on them.
//!
//! Preimages of y are assigned to the components O₁, O₂, O₃ at the real anchor
//! y = 0, where all three are real, and then followed to y by continuation
//! along paths inside the upper half-plane. Values in the lower half-plane
//! follow from x_s(ȳ) = conj x_s(y).

use crate::error::{Error, Result};
use crate::monodromy::{Generator, MonodromySystem, C3};
use crate::pants::{
    predicted_zero_count, riemann_hurwitz_boundary, riemann_hurwitz_check, Fashion, PantsClass, RiemannHurwitzReport,
    SewingDescriptor, Slot, SlotColor,
};
use crate::poly::Ext;
use crate::rational_map::{cyclic_angle, in_positive_arc, CriticalStructure, RationalMap};
use crate::spectral::{count_zeros_of, u_from_coefficients, EigenPair, Spectrum, Symmetry};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Probe points used to fix const*.
pub const KAPPA_PROBES: usize = 32;
pub const KAPPA_TOL: f64 = 1e-6;
pub const WINDING_SAMPLES: usize = 2048;
pub const SLOT_SAMPLES: usize = 1024;
pub const BOUNDARY_POINTS: usize = 16;
pub const J_SAMPLES: usize = 64;

const TRACK_MAX_STEPS: usize = 200_000;

/// J(x) = x − √(x² − 1) on the branch with |J| ≤ 1.
pub fn joukowski_inverse(x: Complex64) -> Complex64 {
    let s = (x * x - 1.0).sqrt();
    let (p, m) = (x + s, x - s);
    if p.norm() >= m.norm() {
        1.0 / p
    } else {
        1.0 / m
    }
}

fn on_cut(x: Complex64) -> bool {
    x.im.abs() <= 1e-12 * (1.0 + x.re.abs()) && x.re.abs() <= 1.0
}

/// Φ(x) = −π Σ c_n J(x)ⁿ + const*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyTransform {
    pub coefficients: Vec<f64>,
    pub const_star: Complex64,
}

impl CauchyTransform {
    pub fn new(coefficients: Vec<f64>, const_star: Complex64) -> Self {
        CauchyTransform { coefficients, const_star }
    }

    fn series(&self, j: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            acc = (acc + c) * j;
        }
        -PI * acc
    }

    /// Φ without the constant.
    pub fn phi0(&self, x: Complex64) -> Result<Complex64> {
        if on_cut(x) {
            return Err(Error::DomainError(format!("{x} lies on the cut [-1, 1]")));
        }
        Ok(self.series(joukowski_inverse(x)))
    }

    pub fn phi(&self, x: Ext) -> Result<Complex64> {
        match x {
            Ext::Infinity => Ok(self.const_star),
            Ext::Finite(z) => Ok(self.phi0(z)? + self.const_star),
        }
    }

    /// Φ₀(t ± i0) from J(t ± i0) = e^{∓iθ}, θ = arccos t.
    pub fn phi0_boundary(&self, t: f64, side: f64) -> Complex64 {
        let th = t.clamp(-1.0, 1.0).acos();
        self.series(Complex64::from_polar(1.0, -side.signum() * th))
    }

    pub fn phi_boundary(&self, t: f64, side: f64) -> Complex64 {
        self.phi0_boundary(t, side) + self.const_star
    }
}

/// Φ(x) for x off the cut.
pub fn phi(transform: &CauchyTransform, x: Complex64) -> Result<Complex64> {
    transform.phi(Ext::Finite(x))
}

/// κ(x₀) = δ(Φ₀(x₂) + Φ₀(x₃)) − (Φ₀(x₀ + i0) + Φ₀(x₀ − i0)) at the probes,
/// returned with its spread relative to the size of the terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub kappa: Complex64,
    pub spread: f64,
}

pub fn kappa_estimate(map: &RationalMap, coefficients: &[f64], delta: f64) -> Result<KappaEstimate> {
    let t = CauchyTransform::new(coefficients.to_vec(), Complex64::new(0.0, 0.0));
    let mut values = Vec::with_capacity(KAPPA_PROBES);
    let mut scale: f64 = 1.0;
    for k in 0..KAPPA_PROBES {
        let x0 = -0.9 + 1.8 * k as f64 / (KAPPA_PROBES - 1) as f64;
        let y = map.eval_real(x0);
        let pre = map.preimages_real(y);
        let own = pre
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.chordal(Ext::real(x0)).partial_cmp(&b.1.chordal(Ext::real(x0))).unwrap())
            .map(|(i, _)| i)
            .ok_or_else(|| Error::KernelError("no preimages".into()))?;
        let mut others = Complex64::new(0.0, 0.0);
        for (i, z) in pre.iter().enumerate() {
            if i != own {
                if let Ext::Finite(z) = z {
                    others += t.phi0(*z)?;
                }
            }
        }
        let on = t.phi0_boundary(x0, 1.0) + t.phi0_boundary(x0, -1.0);
        scale = scale.max((others * delta).norm()).max(on.norm());
        values.push(others * delta - on);
    }
    let mean = values.iter().sum::<Complex64>() / values.len() as f64;
    let spread = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max) / scale;
    Ok(KappaEstimate { kappa: mean, spread })
}

/// const* = κ/(2 − 2δ), rejecting inputs whose κ is not constant.
pub fn const_star(pair: &EigenPair, map: &RationalMap, lambda: f64) -> Result<Complex64> {
    let sys = MonodromySystem::build(lambda)?;
    let est = kappa_estimate(map, &pair.coefficients, sys.delta)?;
    if est.spread > KAPPA_TOL {
        return Err(Error::NotAnEigenpair(format!("kappa spread {:.3e}", est.spread)));
    }
    Ok(est.kappa / (2.0 - 2.0 * sys.delta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WSample {
    pub y: Complex64,
    pub w: C3,
    /// Preimages ordered as O₁, O₂, O₃.
    pub preimages: [Ext; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureSample {
    pub y: Complex64,
    pub p_plus: Complex64,
    pub p_minus: Complex64,
}

#[derive(Debug, Clone, Copy)]
pub struct LiftOptions {
    /// When false, const* is taken from κ without checking its constancy.
    pub check_kappa: bool,
    pub kappa_tol: f64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { check_kappa: true, kappa_tol: KAPPA_TOL }
    }
}

/// Everything needed to evaluate W and p± for one eigenpair of one map.
#[derive(Debug, Clone)]
pub struct CauchyLift {
    map: RationalMap,
    pub lambda: f64,
    pub transform: CauchyTransform,
    pub structure: CriticalStructure,
    pub system: MonodromySystem,
    pub kappa_spread: f64,
    pub j0: Complex64,
    pub j0_root: Complex64,
    anchor: [Ext; 3],
}

fn min_separation(r: &[Ext]) -> f64 {
    let mut s = f64::INFINITY;
    for i in 0..r.len() {
        for j in (i + 1)..r.len() {
            s = s.min(r[i].chordal(r[j]));
        }
    }
    s
}

fn match_roots(cur: &[Ext; 3], new: &[Ext]) -> Option<[Ext; 3]> {
    if new.len() != 3 {
        return None;
    }
    let s = min_separation(cur).min(min_separation(new));
    let mut out = *cur;
    let mut used = [false; 3];
    for i in 0..3 {
        let (j, d) = new
            .iter()
            .enumerate()
            .map(|(j, z)| (j, cur[i].chordal(*z)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
        if used[j] || d > 0.3 * s {
            return None;
        }
        used[j] = true;
        out[i] = new[j];
    }
    Some(out)
}

fn conj3(r: &[Ext; 3]) -> [Ext; 3] {
    [r[0].conj(), r[1].conj(), r[2].conj()]
}

fn chordal_c(a: Complex64, b: Complex64) -> f64 {
    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
}

fn chebyshev_fractions(n: usize, margin: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let t = 0.5 * (1.0 - (PI * k as f64 / (n - 1) as f64).cos());
            margin + (1.0 - 2.0 * margin) * t
        })
        .collect()
}

impl CauchyLift {
    pub fn new(map: &RationalMap, pair: &EigenPair) -> Result<Self> {
        Self::with_options(map, &pair.coefficients, pair.lambda, LiftOptions::default())
    }

    pub fn with_options(map: &RationalMap, coefficients: &[f64], lambda: f64, opts: LiftOptions) -> Result<Self> {
        if map.degree() != 3 {
            return Err(Error::InvalidInput("the lift needs a degree-3 map".into()));
        }
        let system = MonodromySystem::build(lambda)?;
        let structure = map.critical_structure()?;
        let est = kappa_estimate(map, coefficients, system.delta)?;
        if opts.check_kappa && est.spread > opts.kappa_tol {
            return Err(Error::NotAnEigenpair(format!("kappa spread {:.3e}", est.spread)));
        }
        let transform = CauchyTransform::new(coefficients.to_vec(), est.kappa / (2.0 - 2.0 * system.delta));
        let anchor = Self::assign_anchor(map, &structure)?;
        let mut lift = CauchyLift {
            map: map.clone(),
            lambda,
            transform,
            structure,
            system,
            kappa_spread: est.spread,
            j0: Complex64::new(0.0, 0.0),
            j0_root: Complex64::new(0.0, 0.0),
            anchor,
        };
        let w = lift.w_vector(Complex64::new(0.3, 2.0))?;
        lift.j0 = lift.system.j_eval(&w.w);
        lift.j0_root = lift.j0.sqrt();
        let high = lift.w_vector(Complex64::new(0.1, 30.0))?;
        if let Ok((pp, pm)) = lift.system.p_from_w(&high.w, lift.j0_root) {
            if pp.im < pm.im {
                lift.j0_root = -lift.j0_root;
            }
        }
        Ok(lift)
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn delta(&self) -> f64 {
        self.system.delta
    }

    /// Labels the real preimages of y = 0: the one in [−1, 1] is O₁, the one
    /// on the arc (b₁, b₂) free of other critical points is O₂, the one on
    /// the arc (b₃, b₄) is O₃.
    fn assign_anchor(map: &RationalMap, s: &CriticalStructure) -> Result<[Ext; 3]> {
        let pre = map.preimages_real(0.0);
        let free_arc = |lo: f64, hi: f64, others: [f64; 2]| {
            if others.iter().any(|&o| in_positive_arc(o, lo, hi)) {
                (hi, lo)
            } else {
                (lo, hi)
            }
        };
        let arc2 = free_arc(s.b[0], s.b[1], [s.b[2], s.b[3]]);
        let arc3 = free_arc(s.b[2], s.b[3], [s.b[0], s.b[1]]);
        let mut out: [Option<Ext>; 3] = [None; 3];
        for z in pre {
            let x = match z {
                Ext::Infinity => f64::INFINITY,
                Ext::Finite(w) if w.im == 0.0 => w.re,
                Ext::Finite(_) => {
                    return Err(Error::AssignmentError("anchor preimage is not real".into()));
                }
            };
            if s.b.iter().any(|&b| Ext::real_or_inf(b).chordal(z) < 1e-8) {
                return Err(Error::AssignmentError(format!("anchor preimage {x} at a critical point")));
            }
            let slot = if (-1.0..=1.0).contains(&x) {
                0
            } else if in_positive_arc(x, arc2.0, arc2.1) {
                1
            } else if in_positive_arc(x, arc3.0, arc3.1) {
                2
            } else {
                return Err(Error::AssignmentError(format!("anchor preimage {x} in no component")));
            };
            if out[slot].replace(z).is_some() {
                return Err(Error::AssignmentError("two anchor preimages in one component".into()));
            }
        }
        match out {
            [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
            _ => Err(Error::AssignmentError("anchor preimages incomplete".into())),
        }
    }

    /// Continues the labeled roots along the path y(t), t ∈ [0, 1].
    fn track(&self, start: [Ext; 3], path: &dyn Fn(f64) -> Complex64) -> Result<[Ext; 3]> {
        let mut roots = start;
        let (mut t, mut h) = (0.0f64, 1.0f64 / 16.0);
        let mut steps = 0;
        while t < 1.0 {
            steps += 1;
            if steps > TRACK_MAX_STEPS || h < 1e-15 {
                return Err(Error::AssignmentError(format!("continuation stalled at y = {}", path(t))));
            }
            let step = h.min(1.0 - t);
            let next = if t + step >= 1.0 { 1.0 } else { t + step };
            let new = self.map.preimages(Ext::Finite(path(next)));
            match match_roots(&roots, &new) {
                Some(r) => {
                    roots = r;
                    t = next;
                    h = (2.0 * h).min(1.0 / 16.0);
                }
                None => h *= 0.5,
            }
        }
        Ok(roots)
    }

    fn track_segments(&self, start: [Ext; 3], pts: &[Complex64]) -> Result<[Ext; 3]> {
        let mut roots = start;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            roots = self.track(roots, &|t| a + (b - a) * t)?;
        }
        Ok(roots)
    }

    /// Labeled preimages of y off the real axis.
    pub fn preimages_at(&self, y: Complex64) -> Result<[Ext; 3]> {
        if y.im == 0.0 {
            return Err(Error::InvalidInput("use boundary_preimages for real y".into()));
        }
        let up = if y.im > 0.0 { y } else { y.conj() };
        let d = (0.5 * up.norm()).max(0.2);
        let mid = up * 0.5 + Complex64::new(0.0, d);
        let r = self.track_segments(self.anchor, &[Complex64::new(0.0, 0.0), mid, up])?;
        Ok(if y.im > 0.0 { r } else { conj3(&r) })
    }

    /// Labeled preimages of y + i0 for real y.
    pub fn boundary_preimages(&self, y: f64) -> Result<[Ext; 3]> {
        if y.is_infinite() {
            return Err(Error::InvalidInput("boundary point at infinity".into()));
        }
        let yc = Complex64::new(y, 0.0);
        let d = (0.5 * y.abs()).max(0.2);
        let mid = yc * 0.5 + Complex64::new(0.0, d);
        self.track_segments(self.anchor, &[Complex64::new(0.0, 0.0), mid, yc])
    }

    /// W from labeled preimages; `side` is +1 for y + i0, −1 for y − i0 and
    /// `None` off the real axis.
    fn w_from_roots(&self, roots: &[Ext; 3], side: Option<f64>) -> Result<C3> {
        let mut w = C3::zeros();
        for (s, z) in roots.iter().enumerate() {
            w[s] = match (z, side) {
                (Ext::Finite(x), Some(sd)) if x.im.abs() <= 1e-12 * (1.0 + x.re.abs()) && x.re.abs() <= 1.0 => {
                    let orient = self.map.derivative_real(x.re).signum();
                    self.transform.phi_boundary(x.re, sd * orient)
                }
                _ => self.transform.phi(*z)?,
            };
        }
        Ok(w)
    }

    pub fn w_vector(&self, y: Complex64) -> Result<WSample> {
        let pre = self.preimages_at(y)?;
        Ok(WSample { y, w: self.w_from_roots(&pre, None)?, preimages: pre })
    }

    /// W(y ± i0) for real y.
    pub fn w_boundary(&self, y: f64, side: f64) -> Result<WSample> {
        let up = self.boundary_preimages(y)?;
        self.boundary_sample(y, &up, side)
    }

    fn boundary_sample(&self, y: f64, upper: &[Ext; 3], side: f64) -> Result<WSample> {
        let pre = if side > 0.0 { *upper } else { conj3(upper) };
        Ok(WSample { y: Complex64::new(y, 0.0), w: self.w_from_roots(&pre, Some(side))?, preimages: pre })
    }

    pub fn p_pair(&self, w: &C3) -> Result<(Complex64, Complex64)> {
        self.system.p_from_w(w, self.j0_root)
    }

    pub fn structure_sample(&self, s: &WSample) -> Result<StructureSample> {
        let (p_plus, p_minus) = self.p_pair(&s.w)?;
        Ok(StructureSample { y: s.y, p_plus, p_minus })
    }

    pub fn symmetry(&self) -> Symmetry {
        let scale = 1.0 + self.transform.const_star.norm_sqr();
        if self.j0.norm() < 1e-10 * scale {
            Symmetry::Unclassified
        } else if (self.system.delta + 2.0) * self.j0.re < 0.0 {
            Symmetry::Antisymmetric
        } else {
            Symmetry::Symmetric
        }
    }

    pub fn pants(&self) -> Result<PantsClass> {
        let a = self.structure.a;
        PantsClass::new((-1.0, 1.0), (a[0], a[1]), (a[2], a[3]))
    }

    /// Roots at y + i0 for the slot points at fractions `ts`, obtained by a
    /// single continuation along the slot.
    pub fn slot_upper_roots(&self, slot: &Slot, ts: &[f64]) -> Result<Vec<[Ext; 3]>> {
        let (t0, start) = if slot.color == SlotColor::Red {
            let t0 = (cyclic_angle(0.0) - cyclic_angle(slot.lo)).rem_euclid(2.0 * PI)
                / (cyclic_angle(slot.hi) - cyclic_angle(slot.lo)).rem_euclid(2.0 * PI);
            (t0, self.anchor)
        } else {
            let t0 = [0.5, 0.4, 0.6, 0.3, 0.7].into_iter().find(|&t| slot.point_at(t).abs() < 1e3).unwrap_or(0.5);
            (t0, self.boundary_preimages(slot.point_at(t0))?)
        };
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&i, &j| ts[i].partial_cmp(&ts[j]).unwrap());
        let mut out = vec![start; ts.len()];
        let path = |a: f64, b: f64| move |s: f64| Complex64::new(slot.point_at(a + (b - a) * s), 0.0);
        let (mut t, mut r) = (t0, start);
        for &i in order.iter().filter(|&&i| ts[i] >= t0) {
            r = self.track(r, &path(t, ts[i]))?;
            t = ts[i];
            out[i] = r;
        }
        let (mut t, mut r) = (t0, start);
        for &i in order.iter().rev().filter(|&&i| ts[i] < t0) {
            r = self.track(r, &path(t, ts[i]))?;
            t = ts[i];
            out[i] = r;
        }
        Ok(out)
    }

    fn slot_fraction(slot: &Slot, y: f64) -> f64 {
        let tau = 2.0 * PI;
        let span = (cyclic_angle(slot.hi) - cyclic_angle(slot.lo)).rem_euclid(tau);
        (cyclic_angle(y) - cyclic_angle(slot.lo)).rem_euclid(tau) / span
    }

    fn slots(&self) -> Result<[(Slot, Generator); 3]> {
        let p = self.pants()?;
        Ok([(p.red, Generator::D), (p.blue, Generator::D3), (p.green, Generator::D2)])
    }

    /// Residuals of W(y + i0) = M W(y − i0) on each slot and of the
    /// corresponding relations p±(y + i0) = χ(M) p∓(y − i0).
    pub fn boundary_residuals(&self) -> Result<BoundaryResiduals> {
        let ts: Vec<f64> = (0..BOUNDARY_POINTS).map(|k| 0.05 + 0.9 * k as f64 / (BOUNDARY_POINTS - 1) as f64).collect();
        let mut res = [0.0f64; 3];
        let mut bvp: f64 = 0.0;
        for (idx, (slot, g)) in self.slots()?.iter().enumerate() {
            let m = self.system.matrix_c(*g);
            let chi = self.system.chi_generator(*g);
            let roots = self.slot_upper_roots(slot, &ts)?;
            for (k, r) in roots.iter().enumerate() {
                let y = slot.point_at(ts[k]);
                let wp = self.boundary_sample(y, r, 1.0)?.w;
                let wm = self.boundary_sample(y, r, -1.0)?.w;
                let scale = wp.norm().max(wm.norm()).max(f64::MIN_POSITIVE);
                res[idx] = res[idx].max((wp - m * wm).norm() / scale);
                if let (Ok((pp, pm)), Ok((qp, qm))) = (self.p_pair(&wp), self.p_pair(&wm)) {
                    bvp = bvp.max(chordal_c(pp, chi.apply(qm))).max(chordal_c(pm, chi.apply(qp)));
                }
            }
        }
        Ok(BoundaryResiduals { red: res[0], blue: res[1], green: res[2], bvp })
    }

    /// Relative spread of J(W(y)) over seeded interior points.
    pub fn j_spread(&self) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a30);
        let mut vals = Vec::with_capacity(J_SAMPLES);
        for _ in 0..J_SAMPLES {
            let y = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0));
            let y = if rng.gen_bool(0.5) { y } else { y.conj() };
            vals.push(self.system.j_eval(&self.w_vector(y)?.w));
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<Complex64>() / n;
        let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n;
        Ok(var.sqrt() / mean.norm().max(f64::MIN_POSITIVE))
    }

    /// max |p⁺(ȳ)·conj(p⁻(y)) − 1| over seeded points of the upper half-plane.
    pub fn mirror_residual(&self) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d69);
        let mut worst: f64 = 0.0;
        for _ in 0..8 {
            let y = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0));
            let (_, pm) = self.p_pair(&self.w_vector(y)?.w)?;
            let (qp, _) = self.p_pair(&self.w_vector(y.conj())?.w)?;
            worst = worst.max((qp * pm.conj() - 1.0).norm());
        }
        Ok(worst)
    }

    /// p⁺ along the closed loop: lower side lo → hi, then upper side hi → lo.
    fn slot_loop(&self, slot: &Slot, n: usize, margin: f64) -> Result<Vec<StructureSample>> {
        let ts = chebyshev_fractions(n, margin);
        let roots = self.slot_upper_roots(slot, &ts)?;
        let mut out = Vec::with_capacity(2 * n);
        for (k, r) in roots.iter().enumerate() {
            out.push(self.structure_sample(&self.boundary_sample(slot.point_at(ts[k]), r, -1.0)?)?);
        }
        for (k, r) in roots.iter().enumerate().rev() {
            out.push(self.structure_sample(&self.boundary_sample(slot.point_at(ts[k]), r, 1.0)?)?);
        }
        Ok(out)
    }

    fn mu_real(&self) -> Result<f64> {
        if self.system.mu.im != 0.0 || !(self.system.mu.re > 0.0) {
            return Err(Error::InvalidInput(format!("μ is not real positive at λ = {}", self.lambda)));
        }
        Ok(self.system.mu.re)
    }

    /// Winding of p⁺ around μ⁻¹ along both sides of [−1, 1] with the circle
    /// residual of the samples.
    pub fn red_winding(&self) -> Result<RedWinding> {
        let center = 1.0 / self.mu_real()?;
        let r2 = center * center - 1.0;
        let red = self.pants()?.red;
        let mut n = WINDING_SAMPLES;
        let mut last: Option<RedWinding> = None;
        for _ in 0..4 {
            let lp = self.slot_loop(&red, n, 0.0)?;
            let angles: Vec<f64> = lp.iter().map(|s| (s.p_plus - center).arg()).collect();
            let (total, max_jump, back) = unwrap_stats(&angles);
            let raw = total / (2.0 * PI);
            let circle = lp
                .iter()
                .flat_map(|s| [s.p_plus, s.p_minus])
                .map(|p| ((p - center).norm_sqr() - r2).abs())
                .fold(0.0, f64::max);
            let cur = RedWinding {
                m: raw.abs().round() as u32,
                raw,
                monotone: back < 1e-6,
                max_backstep: back,
                circle_residual: circle,
                samples: n,
            };
            let stable = max_jump < 0.25 * PI && last.as_ref().is_some_and(|l| l.m == cur.m);
            if stable && (raw.abs() - cur.m as f64).abs() < 1e-3 {
                return Ok(cur);
            }
            last = Some(cur);
            n *= 2;
        }
        let l = last.unwrap();
        if (l.raw.abs() - l.m as f64).abs() < 1e-3 {
            Ok(l)
        } else {
            Err(Error::WindingError(format!("winding {:.6} is not an integer", l.raw)))
        }
    }

    /// Winding data of p⁺ on the line ε·ℝ̂ (green) or ε²·ℝ̂ (blue).
    pub fn slot_winding(&self, color: SlotColor) -> Result<SlotWinding> {
        let pants = self.pants()?;
        let eps = self.system.eps;
        let (slot, rot) = match color {
            SlotColor::Blue => (pants.blue, eps * eps),
            SlotColor::Green => (pants.green, eps),
            SlotColor::Red => return Err(Error::InvalidInput("use red_winding".into())),
        };
        let lp = self.slot_loop(&slot, SLOT_SAMPLES, 1e-7)?;
        let qs: Vec<Complex64> = lp.iter().map(|s| s.p_plus / rot).collect();
        let line_residual = qs.iter().map(|q| q.im.abs() / (1.0 + q.norm_sqr())).fold(0.0, f64::max);
        let i = Complex64::new(0.0, 1.0);
        let angles: Vec<f64> = qs.iter().map(|q| ((q - i) / (q + i)).arg()).collect();
        let (total, _, _) = unwrap_stats(&angles);
        let runs = monotone_runs(&angles);
        let tau = 2.0 * PI;
        let count = |delta: f64| (delta / tau + 1e-9).floor() as u32 + 1;
        if runs.len() <= 1 {
            return Ok(SlotWinding {
                color,
                reversals: 0,
                total_angle: total,
                d: (total.abs() / tau).round() as u32,
                d_minus: None,
                h: None,
                line_residual,
            });
        }
        let mut sorted = runs.clone();
        sorted.sort_by(|a, b| b.length.partial_cmp(&a.length).unwrap());
        let mut h: Vec<f64> = runs.iter().map(|r| qs[r.start].norm()).collect();
        h.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(SlotWinding {
            color,
            reversals: runs.len() as u32,
            total_angle: total,
            d: count(sorted[0].length),
            d_minus: Some(count(sorted[1..].iter().map(|r| r.length).sum())),
            h: if h.len() == 2 { Some((h[0], h[1])) } else { None },
            line_residual,
        })
    }

    /// The unnormalized right-hand side of the reconstruction formula at the
    /// points x ∈ (−1, 1).
    pub fn reconstruct_raw(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let mu = self.system.mu;
        let factor = ((self.system.delta + 2.0) * self.j0 / 3.0).sqrt();
        let red = self.pants()?.red;
        let ys: Vec<f64> = xs.iter().map(|&x| self.map.eval_real(x)).collect();
        let ts: Vec<f64> = ys.iter().map(|&y| Self::slot_fraction(&red, y)).collect();
        let roots = self.slot_upper_roots(&red, &ts)?;
        let mut out = Vec::with_capacity(xs.len());
        for (k, r) in roots.iter().enumerate() {
            let s = self.boundary_sample(ys[k], r, 1.0)?;
            let (pp, pm) = self.p_pair(&s.w)?;
            let diff = pp - pm;
            if diff.norm() <= 1e-13 * (1.0 + pp.norm()) {
                return Err(Error::StructureDegenerate(format!("p+ = p- at x = {}", xs[k])));
            }
            out.push(factor * (pp * pm - mu * (pp + pm) + 1.0) / diff / (2.0 * PI));
        }
        Ok(out)
    }

    /// Reconstructed u on `xs`, aligned to the eigenfunction by the optimal
    /// complex scalar, with the relative L² discrepancy.
    pub fn reconstruct_aligned(&self, xs: &[f64]) -> Result<(Vec<f64>, f64)> {
        let raw = self.reconstruct_raw(xs)?;
        let u: Vec<f64> = xs.iter().map(|&x| u_from_coefficients(&self.transform.coefficients, x)).collect();
        let num: Complex64 = raw.iter().zip(&u).map(|(r, v)| r.conj() * v).sum();
        let den: f64 = raw.iter().map(|r| r.norm_sqr()).sum();
        if den == 0.0 {
            return Err(Error::StructureDegenerate("reconstruction vanishes".into()));
        }
        let alpha = num / den;
        let rec: Vec<Complex64> = raw.iter().map(|r| alpha * r).collect();
        let err: f64 = rec.iter().zip(&u).map(|(r, v)| (r - v).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok((rec.iter().map(|r| r.re).collect(), err / norm.max(f64::MIN_POSITIVE)))
    }

    pub fn reconstruction_error(&self) -> Result<f64> {
        Ok(self.reconstruct_aligned(&reconstruction_grid())?.1)
    }
}

/// Interior Chebyshev points used for reconstruction checks.
pub fn reconstruction_grid() -> Vec<f64> {
    let n = 201;
    (0..n).map(|k| (PI * (k as f64 + 0.5) / n as f64).cos()).collect()
}

/// Total unwrapped change, the largest single jump and the largest step
/// against the overall direction.
fn unwrap_stats(angles: &[f64]) -> (f64, f64, f64) {
    let steps: Vec<f64> = angles
        .windows(2)
        .map(|w| {
            let mut d = w[1] - w[0];
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            d
        })
        .collect();
    let total: f64 = steps.iter().sum();
    let max_jump = steps.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let back = steps.iter().map(|&d| if d * total < 0.0 { d.abs() } else { 0.0 }).fold(0.0, f64::max);
    (total, max_jump, back)
}

#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    length: f64,
    sign: f64,
}

/// Maximal monotone pieces of the unwrapped angle sequence, treated
/// cyclically, with pieces shorter than 1e−6 rad absorbed into neighbours.
fn monotone_runs(angles: &[f64]) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (k, w) in angles.windows(2).enumerate() {
        let mut d = w[1] - w[0];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        if d == 0.0 {
            continue;
        }
        match runs.last_mut() {
            Some(r) if r.sign * d > 0.0 => r.length += d.abs(),
            _ => runs.push(Run { start: k, length: d.abs(), sign: d.signum() }),
        }
    }
    loop {
        if runs.len() > 1 && runs[0].sign == runs[runs.len() - 1].sign {
            let first = runs.remove(0);
            runs.last_mut().unwrap().length += first.length;
        }
        let Some(k) = (0..runs.len()).find(|&k| runs[k].length < 1e-6) else {
            break;
        };
        if runs.len() <= 1 {
            break;
        }
        runs.remove(k);
        let prev = if k == 0 { runs.len() - 1 } else { k - 1 };
        let next = k % runs.len();
        if next != prev && runs[prev].sign == runs[next].sign {
            let merged = runs.remove(next);
            let prev = if next < prev { prev - 1 } else { prev };
            runs[prev].length += merged.length;
        }
    }
    runs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResiduals {
    pub red: f64,
    pub blue: f64,
    pub green: f64,
    /// Largest chordal residual of p±(y + i0) = χ(M) p∓(y − i0).
    pub bvp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedWinding {
    pub m: u32,
    pub raw: f64,
    pub monotone: bool,
    pub max_backstep: f64,
    pub circle_residual: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotWinding {
    pub color: SlotColor,
    /// Number of monotone pieces of the boundary image when it turns back.
    pub reversals: u32,
    pub total_angle: f64,
    /// Generic covering count of the image line (d⁺ when the image turns back).
    pub d: u32,
    pub d_minus: Option<u32>,
    /// |p| at the two turning points.
    pub h: Option<(f64, f64)>,
    pub line_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    pub m: u32,
    pub d_g: u32,
    pub d_b: u32,
    pub predicted_zeros: u32,
    pub red: RedWinding,
    pub green: SlotWinding,
    pub blue: SlotWinding,
    pub sewing: Option<SewingDescriptor>,
    pub riemann_hurwitz: std::result::Result<RiemannHurwitzReport, String>,
}

fn sewing_from(green: &SlotWinding, blue: &SlotWinding) -> Option<SewingDescriptor> {
    let sub1 = |d: u32| d.checked_sub(1);
    match (green.reversals, blue.reversals) {
        (0, 0) => {
            Some(SewingDescriptor { fashion: Fashion::S1, h1: None, h2: None, m1: sub1(green.d)?, m2: sub1(blue.d)? })
        }
        (0, 2) => Some(SewingDescriptor {
            fashion: Fashion::S2,
            h1: blue.h.map(|h| h.0),
            h2: blue.h.map(|h| h.1),
            m1: sub1(green.d)?,
            m2: sub1(blue.d)?,
        }),
        (2, 0) => Some(SewingDescriptor {
            fashion: Fashion::S3,
            h1: green.h.map(|h| h.0),
            h2: green.h.map(|h| h.1),
            m1: sub1(green.d)?,
            m2: sub1(blue.d)?,
        }),
        _ => None,
    }
}

impl CauchyLift {
    pub fn winding_report(&self) -> Result<WindingReport> {
        if self.symmetry() != Symmetry::Antisymmetric {
            return Err(Error::InvalidInput("winding report needs an antisymmetric pair".into()));
        }
        let red = self.red_winding()?;
        let green = self.slot_winding(SlotColor::Green)?;
        let blue = self.slot_winding(SlotColor::Blue)?;
        let sewing = sewing_from(&green, &blue);
        let rh = match (green.reversals, blue.reversals) {
            (0, 0) => riemann_hurwitz_check(red.m, green.d, blue.d, true),
            (0, 2) => riemann_hurwitz_boundary(red.m, green.d, blue.d, blue.d_minus.unwrap_or(0), red.m + 1),
            (2, 0) => riemann_hurwitz_boundary(red.m, blue.d, green.d, green.d_minus.unwrap_or(0), red.m + 1),
            (g, b) => Err(Error::CountingViolation(format!("unsupported reversal pattern ({g}, {b})"))),
        };
        Ok(WindingReport {
            m: red.m,
            d_g: green.d,
            d_b: blue.d,
            predicted_zeros: red.m + 1,
            red,
            green,
            blue,
            sewing,
            riemann_hurwitz: rh.map_err(|e| e.to_string()),
        })
    }
}

/// Free-function forms of the lift operations.
pub fn w_vector(pair: &EigenPair, map: &RationalMap, lambda: f64, y: Complex64) -> Result<WSample> {
    CauchyLift::with_options(map, &pair.coefficients, lambda, LiftOptions::default())?.w_vector(y)
}

pub fn classify(pair: &EigenPair, map: &RationalMap, lambda: f64) -> Result<Symmetry> {
    let lift = CauchyLift::with_options(map, &pair.coefficients, lambda, LiftOptions::default())?;
    match lift.symmetry() {
        Symmetry::Unclassified => Err(Error::Unclassified),
        s => Ok(s),
    }
}

pub fn winding_report(pair: &EigenPair, map: &RationalMap, lambda: f64) -> Result<WindingReport> {
    CauchyLift::with_options(map, &pair.coefficients, lambda, LiftOptions::default())?.winding_report()
}

/// Tags converged pairs of a degree-3 map by their mirror symmetry; pairs
/// that cannot be lifted stay unclassified.
pub fn assign_symmetry(map: &RationalMap, spectrum: &mut Spectrum) {
    if map.degree() != 3 {
        return;
    }
    for pair in spectrum.pairs.iter_mut().filter(|p| p.is_converged()) {
        pair.symmetry = CauchyLift::new(map, pair).map(|l| l.symmetry()).unwrap_or(Symmetry::Unclassified);
    }
}

/// u(x) from the structure coordinates, scaled to the eigenfunction by the
/// alignment computed on the reconstruction grid.
pub fn reconstruct_u(pair: &EigenPair, map: &RationalMap, lambda: f64, x: f64) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::InvalidInput(format!("x = {x} outside (-1, 1)")));
    }
    let lift = CauchyLift::with_options(map, &pair.coefficients, lambda, LiftOptions::default())?;
    let mut grid = reconstruction_grid();
    grid.push(x);
    let (vals, _) = lift.reconstruct_aligned(&grid)?;
    Ok(*vals.last().unwrap())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, passed: value < tolerance }
    }

    fn equal(name: &str, lhs: u32, rhs: u32) -> Self {
        Check { name: name.into(), value: lhs as f64 - rhs as f64, tolerance: 0.0, passed: lhs == rhs }
    }
}

/// Per-eigenpair analysis record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub lambda: f64,
    #[serde(rename = "J0")]
    pub j0: Complex64,
    pub symmetry: Symmetry,
    pub kappa_spread: f64,
    pub j_spread: f64,
    pub boundary_residuals: BoundaryResiduals,
    pub observed_zeros: u32,
    pub m: Option<u32>,
    pub d_g: Option<u32>,
    pub d_b: Option<u32>,
    pub predicted_zeros: Option<u32>,
    pub mirror_residual: Option<f64>,
    pub reconstruction_error: Option<f64>,
    pub winding: Option<WindingReport>,
    pub sewing: Option<SewingDescriptor>,
    pub checks: Vec<Check>,
    pub errors: Vec<String>,
}

impl PairAnalysis {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).chain(self.errors.iter().cloned()).collect()
    }
}

/// Runs the full diagnostic suite on one eigenpair. Symmetric pairs only get
/// the lift-level checks; the geometric suite is reserved for antisymmetric
/// ones.
pub fn analyze_pair(map: &RationalMap, pair: &EigenPair) -> Result<PairAnalysis> {
    let lift = CauchyLift::new(map, pair)?;
    let symmetry = lift.symmetry();
    let zeros = count_zeros_of(&pair.coefficients);
    let observed = zeros.total() as u32;
    let boundary = lift.boundary_residuals()?;
    let j_spread = lift.j_spread()?;
    let mut checks = vec![
        Check::below("kappa_constancy", lift.kappa_spread, KAPPA_TOL),
        Check::below("j_constancy", j_spread, 1e-6),
        Check::below("red_boundary_relation", boundary.red, 1e-6),
        Check::below("blue_boundary_relation", boundary.blue, 1e-6),
        Check::below("green_boundary_relation", boundary.green, 1e-6),
        Check::below("projective_boundary_relation", boundary.bvp, 1e-5),
    ];
    let mut out = PairAnalysis {
        lambda: pair.lambda,
        j0: lift.j0,
        symmetry,
        kappa_spread: lift.kappa_spread,
        j_spread,
        boundary_residuals: boundary,
        observed_zeros: observed,
        m: None,
        d_g: None,
        d_b: None,
        predicted_zeros: None,
        mirror_residual: None,
        reconstruction_error: None,
        winding: None,
        sewing: None,
        checks: Vec::new(),
        errors: Vec::new(),
    };
    if symmetry == Symmetry::Antisymmetric {
        match lift.mirror_residual() {
            Ok(v) => {
                out.mirror_residual = Some(v);
                checks.push(Check::below("mirror_symmetry", v, 1e-5));
            }
            Err(e) => out.errors.push(format!("mirror_symmetry: {e}")),
        }
        match lift.reconstruction_error() {
            Ok(v) => {
                out.reconstruction_error = Some(v);
                checks.push(Check::below("reconstruction", v, 1e-4));
            }
            Err(e) => out.errors.push(format!("reconstruction: {e}")),
        }
        match lift.winding_report() {
            Ok(w) => {
                checks.push(Check::below("red_circle", w.red.circle_residual, 1e-5));
                checks.push(Check::below("green_line", w.green.line_residual, 1e-5));
                checks.push(Check::below("blue_line", w.blue.line_residual, 1e-5));
                checks.push(Check::equal("zero_winding_law", observed, w.m + 1));
                checks.push(Check {
                    name: "riemann_hurwitz".into(),
                    value: 0.0,
                    tolerance: 0.0,
                    passed: w.riemann_hurwitz.is_ok(),
                });
                if let Some(s) = &w.sewing {
                    checks.push(Check::equal("sewing_zero_count", observed, predicted_zero_count(s)));
                } else {
                    out.errors.push("sewing: fashion could not be determined".into());
                }
                out.m = Some(w.m);
                out.d_g = Some(w.d_g);
                out.d_b = Some(w.d_b);
                out.predicted_zeros = Some(w.predicted_zeros);
                out.sewing = w.sewing.clone();
                out.winding = Some(w);
            }
            Err(e) => out.errors.push(format!("winding: {e}")),
        }
    }
    out.checks = checks;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::cheb_u;

    #[test]
    fn joukowski_branch() {
        for z in [Complex64::new(2.0, 0.0), Complex64::new(-3.0, 0.1), Complex64::new(0.1, -0.5)] {
            let j = joukowski_inverse(z);
            assert!(j.norm() < 1.0);
            assert!(((j + 1.0 / j) * 0.5 - z).norm() < 1e-13);
        }
        assert_eq!(joukowski_inverse(Complex64::new(-2.0, 0.0)).im, 0.0);
    }

    #[test]
    fn transform_basics() {
        let t = CauchyTransform::new(vec![0.0; 3], Complex64::new(2.5, 0.0));
        assert_eq!(t.phi(Ext::real(3.0)).unwrap(), Complex64::new(2.5, 0.0));
        let t = CauchyTransform::new(vec![1.0, -0.5, 0.25], Complex64::new(0.7, 0.0));
        assert!((t.phi(Ext::real(1e9)).unwrap() - t.const_star).norm() < 1e-8);
        assert!(t.phi(Ext::real(0.2)).is_err());
        for &x in &[-0.8, 0.0, 0.3, 0.95] {
            let jump = (t.phi_boundary(x, 1.0) - t.phi_boundary(x, -1.0)) / Complex64::new(0.0, 2.0 * PI);
            let dens: f64 =
                (1.0 - x * x).sqrt() * [1.0, -0.5, 0.25].iter().enumerate().map(|(k, c)| c * cheb_u(k, x)).sum::<f64>();
            assert!((jump - dens).norm() < 1e-12);
            let near = t.phi(Ext::Finite(Complex64::new(x, 1e-9))).unwrap();
            assert!((near - t.phi_boundary(x, 1.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn runs_of_a_closed_loop() {
        let n = 400;
        let mono: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / (n - 1) as f64).collect();
        assert_eq!(monotone_runs(&mono).len(), 1);
        let back: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                (2.0 * PI * t).sin()
            })
            .collect();
        assert_eq!(monotone_runs(&back).len(), 2);
    }
}
