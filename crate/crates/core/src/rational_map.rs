//! Real rational maps of degree at most three: evaluation, preimages, critical
//! structure, gauge transformations and reconstruction of the cubic from its
//! branch values.

use crate::error::{Error, Result};
use crate::mobius::Mobius;
use crate::poly::{resultant, roots_complex, Ext, Poly};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Real rational map P/Q with coprime P, Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapJson", into = "MapJson")]
pub struct RationalMap {
    num: Poly,
    den: Poly,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TryFrom<MapJson> for RationalMap {
    type Error = Error;
    fn try_from(j: MapJson) -> Result<Self> {
        RationalMap::new(j.num, j.den)
    }
}

impl From<RationalMap> for MapJson {
    fn from(r: RationalMap) -> Self {
        MapJson { num: r.num.coeffs().to_vec(), den: r.den.coeffs().to_vec() }
    }
}

/// Type of a real value with respect to its real preimages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointType {
    /// Three real preimages.
    #[serde(rename = "3:0")]
    ThreeZero,
    /// One real preimage and a complex-conjugate pair.
    #[serde(rename = "1:2")]
    OneTwo,
}

/// The three components of the lifted pants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentLabel {
    O1,
    O2,
    O3,
}

impl ComponentLabel {
    pub fn index(self) -> usize {
        match self {
            ComponentLabel::O1 => 0,
            ComponentLabel::O2 => 1,
            ComponentLabel::O3 => 2,
        }
    }
}

/// Branch values a, critical points b and co-preimages c, labeled so that
/// (a₁, a₂) and (a₃, a₄) are the (1:2) arcs. Infinite entries are stored as
/// `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalStructure {
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub c: [f64; 4],
}

/// Position on the circle ℝ̂, in (−π, π].
pub fn cyclic_angle(x: f64) -> f64 {
    if x.is_infinite() {
        std::f64::consts::PI
    } else {
        2.0 * x.atan()
    }
}

/// True when `x` lies strictly inside the arc running in the positive
/// direction from `lo` to `hi`.
pub fn in_positive_arc(x: f64, lo: f64, hi: f64) -> bool {
    let tau = 2.0 * std::f64::consts::PI;
    let t = (cyclic_angle(x) - cyclic_angle(lo)).rem_euclid(tau);
    let h = (cyclic_angle(hi) - cyclic_angle(lo)).rem_euclid(tau);
    t > 0.0 && t < h
}

fn ext_to_real(e: Ext) -> f64 {
    match e {
        Ext::Infinity => f64::INFINITY,
        Ext::Finite(z) => z.re,
    }
}

fn real_close(x: f64, y: f64, tol: f64) -> bool {
    Ext::real_or_inf(x).chordal(Ext::real_or_inf(y)) <= tol
}

impl Ext {
    pub fn real_or_inf(x: f64) -> Ext {
        if x.is_infinite() {
            Ext::Infinity
        } else {
            Ext::real(x)
        }
    }
}

impl RationalMap {
    /// Builds a reduced map from ascending coefficient lists. Both lists are
    /// rescaled jointly to unit max-norm.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        let p = Poly::new(num);
        let q = Poly::new(den);
        if q.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let s = p.max_abs().max(q.max_abs());
        let (p, q) = (p.scale(1.0 / s), q.scale(1.0 / s));
        let deg = p.degree().max(q.degree());
        if deg == 0 {
            return Err(Error::InvalidInput("constant map".into()));
        }
        if deg > 3 {
            return Err(Error::InvalidInput(format!("degree {deg} exceeds 3")));
        }
        if q.degree() > 0 && p.degree() > 0 && resultant(&p, &q).abs() <= 1e-10 {
            return Err(Error::InvalidInput("numerator and denominator share a root".into()));
        }
        Ok(RationalMap { num: p, den: q })
    }

    pub fn identity() -> Self {
        RationalMap::new(vec![0.0, 1.0], vec![1.0]).unwrap()
    }

    /// R(x) = x + (x² − 1)/(2C), the quadratic test family.
    pub fn quadratic(c: f64) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::InvalidInput(format!("quadratic family needs C > 1, got {c}")));
        }
        RationalMap::new(vec![-1.0 / (2.0 * c), 1.0, 1.0 / (2.0 * c)], vec![1.0])
    }

    /// Normalized cubic x²L(x), L(x) = 1 + 2(c − 1)(x − 1)/(x − c).
    pub fn normalized_cubic(c: f64) -> Result<Self> {
        RationalMap::new(vec![0.0, 0.0, 2.0 - 3.0 * c, 2.0 * c - 1.0], vec![-c, 1.0])
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    pub fn value_at_infinity(&self) -> f64 {
        let (dp, dq) = (self.num.degree(), self.den.degree());
        if dp > dq {
            f64::INFINITY
        } else if dp == dq {
            self.num.coeff(dp) / self.den.coeff(dq)
        } else {
            0.0
        }
    }

    pub fn eval(&self, x: Ext) -> Ext {
        match x {
            Ext::Infinity => Ext::real_or_inf(self.value_at_infinity()),
            Ext::Finite(z) => {
                let q = self.den.eval_c(z);
                if q.norm() == 0.0 {
                    Ext::Infinity
                } else {
                    Ext::Finite(self.num.eval_c(z) / q)
                }
            }
        }
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.num.eval_c(z) / self.den.eval_c(z)
    }

    /// Real evaluation; poles and the point at infinity give `f64::INFINITY`
    /// where appropriate.
    pub fn eval_real(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return self.value_at_infinity();
        }
        let q = self.den.eval(x);
        if q == 0.0 {
            f64::INFINITY
        } else {
            self.num.eval(x) / q
        }
    }

    /// P′Q − PQ′, whose zeros are the finite critical points.
    pub fn critical_numerator(&self) -> Poly {
        self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()))
    }

    pub fn derivative_real(&self, x: f64) -> f64 {
        let q = self.den.eval(x);
        self.critical_numerator().eval(x) / (q * q)
    }

    pub fn derivative_c(&self, z: Complex64) -> Complex64 {
        let q = self.den.eval_c(z);
        self.critical_numerator().eval_c(z) / (q * q)
    }

    /// The 2d − 2 critical points, counted with multiplicity, infinity included.
    pub fn critical_points(&self) -> Vec<Ext> {
        let formal = 2 * self.degree() - 2;
        self.critical_numerator().roots_ext(formal)
    }

    /// Solutions of R(x) = y, with multiplicity, padded with infinity.
    pub fn preimages(&self, y: Ext) -> Vec<Ext> {
        let d = self.degree();
        match y {
            Ext::Infinity => self.den.roots_ext(d),
            Ext::Finite(y) => {
                let c: Vec<Complex64> =
                    (0..=d).map(|k| Complex64::new(self.num.coeff(k), 0.0) - y * self.den.coeff(k)).collect();
                let mut r = roots_complex(&c);
                if y.im == 0.0 {
                    for z in r.iter_mut() {
                        if let Ext::Finite(w) = z {
                            if w.im.abs() < 1e-9 * (1.0 + w.re.abs()) {
                                *w = Complex64::new(w.re, 0.0);
                            }
                        }
                    }
                }
                r
            }
        }
    }

    pub fn preimages_real(&self, y: f64) -> Vec<Ext> {
        self.preimages(Ext::real_or_inf(y))
    }

    fn count_real_preimages(&self, y: f64) -> usize {
        self.preimages_real(y)
            .iter()
            .filter(|e| match e {
                Ext::Infinity => true,
                Ext::Finite(z) => z.im == 0.0,
            })
            .count()
    }

    /// Real critical values of R (error if any critical point is non-real).
    fn real_critical_data(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let pts = self.critical_points();
        let mut b = Vec::new();
        for p in pts {
            match p {
                Ext::Infinity => b.push(f64::INFINITY),
                Ext::Finite(z) if z.im == 0.0 => b.push(z.re),
                Ext::Finite(_) => {
                    return Err(Error::NotInComponent("complex critical point".into()));
                }
            }
        }
        let a = b.iter().map(|&x| self.eval_real(x)).collect();
        Ok((b, a))
    }

    /// Type of a real value y, computed from its preimages.
    pub fn classify_point(&self, y: f64) -> Result<PointType> {
        let pts = self.critical_points();
        for p in pts {
            let v = self.eval(p);
            if v.chordal(Ext::real_or_inf(y)) < 1e-12 {
                return Err(Error::AtBranchPoint(y));
            }
        }
        match self.count_real_preimages(y) {
            n if n == self.degree() => Ok(PointType::ThreeZero),
            _ => Ok(PointType::OneTwo),
        }
    }

    /// Critical structure of a degree-3 map with four real, separate branch
    /// values.
    pub fn critical_structure(&self) -> Result<CriticalStructure> {
        if self.degree() != 3 {
            return Err(Error::InvalidInput(format!("critical structure requires degree 3, got {}", self.degree())));
        }
        let (b, a) = self.real_critical_data()?;
        if b.len() != 4 {
            return Err(Error::NotInComponent("expected four critical points".into()));
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                if real_close(b[i], b[j], 1e-9) || real_close(a[i], a[j], 1e-9) {
                    return Err(Error::NotInComponent("coincident critical data".into()));
                }
            }
        }
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&i, &j| cyclic_angle(a[i]).partial_cmp(&cyclic_angle(a[j])).unwrap());
        let tau = 2.0 * std::f64::consts::PI;
        let mut arc_type = Vec::with_capacity(4);
        for k in 0..4 {
            let lo = cyclic_angle(a[order[k]]);
            let hi = cyclic_angle(a[order[(k + 1) % 4]]);
            let span = (hi - lo).rem_euclid(tau);
            let mid = lo + 0.5 * span;
            let y = (0.5 * mid).tan();
            arc_type.push(self.classify_point(y)?);
        }
        let one_two: Vec<usize> = (0..4).filter(|&k| arc_type[k] == PointType::OneTwo).collect();
        if one_two.len() != 2 || (one_two[1] - one_two[0]) != 2 {
            return Err(Error::NotInComponent("branch arcs do not alternate between (1:2) and (3:0)".into()));
        }
        let mut candidates = Vec::new();
        for &k in &one_two {
            let idx = [order[k], order[(k + 1) % 4], order[(k + 2) % 4], order[(k + 3) % 4]];
            candidates.push(idx);
        }
        let brackets_interval = |idx: &[usize; 4]| {
            let (b2, b3) = (b[idx[1]], b[idx[2]]);
            let inside = |x: f64| in_positive_arc(x, b2, b3);
            let others_outside = !inside(b[idx[0]]) && !inside(b[idx[3]]);
            let (lo, hi) = if others_outside { (b2, b3) } else { (b3, b2) };
            [-1.0, 0.0, 1.0].iter().all(|&x| in_positive_arc(x, lo, hi))
        };
        let chosen = candidates.iter().find(|idx| brackets_interval(idx)).copied().unwrap_or_else(|| {
            *candidates
                .iter()
                .min_by(|p, q| cyclic_angle(a[p[0]]).partial_cmp(&cyclic_angle(a[q[0]])).unwrap())
                .unwrap()
        });
        let a_l = chosen.map(|i| a[i]);
        let b_l = chosen.map(|i| b[i]);
        let mut c_l = [0.0; 4];
        for s in 0..4 {
            let pre = self.preimages_real(a_l[s]);
            let bs = Ext::real_or_inf(b_l[s]);
            let far = pre.iter().copied().max_by(|p, q| p.chordal(bs).partial_cmp(&q.chordal(bs)).unwrap()).unwrap();
            c_l[s] = ext_to_real(far);
        }
        Ok(CriticalStructure { a: a_l, b: b_l, c: c_l })
    }

    /// L2 ∘ R ∘ L1 for Möbius maps preserving [−1, 1].
    pub fn gauge_transform(&self, l1: &Mobius, l2: &Mobius) -> Result<RationalMap> {
        for (name, l) in [("L1", l1), ("L2", l2)] {
            if !l.preserves_unit_interval() {
                return Err(Error::InvalidGauge(format!("{name} = {l:?}")));
            }
        }
        Ok(self.precompose(l1).postcompose(l2))
    }

    /// R ∘ L for an arbitrary real Möbius map.
    pub fn precompose(&self, l: &Mobius) -> RationalMap {
        let d = self.degree();
        let lin_num = Poly::new(vec![l.b, l.a]);
        let lin_den = Poly::new(vec![l.d, l.c]);
        let mut p = Poly::constant(0.0);
        let mut q = Poly::constant(0.0);
        for k in 0..=d {
            let term = lin_num.pow(k).mul(&lin_den.pow(d - k));
            p = p.add(&term.scale(self.num.coeff(k)));
            q = q.add(&term.scale(self.den.coeff(k)));
        }
        RationalMap::normalized_unchecked(p, q)
    }

    /// L ∘ R for an arbitrary real Möbius map.
    pub fn postcompose(&self, l: &Mobius) -> RationalMap {
        let p = self.num.scale(l.a).add(&self.den.scale(l.b));
        let q = self.num.scale(l.c).add(&self.den.scale(l.d));
        RationalMap::normalized_unchecked(p, q)
    }

    /// Composition with a Möbius map cannot create common factors, so the
    /// resultant test is skipped here.
    fn normalized_unchecked(p: Poly, q: Poly) -> RationalMap {
        let s = p.max_abs().max(q.max_abs());
        let clean = |v: &Poly| {
            let mut c: Vec<f64> = v.coeffs().iter().map(|x| x / s).collect();
            while c.len() > 1 && c.last().unwrap().abs() <= 1e-14 {
                c.pop();
            }
            Poly::new(c)
        };
        RationalMap { num: clean(&p), den: clean(&q) }
    }
}

/// Report of `validate_ps3_component` with one flag per condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub degree_ok: bool,
    pub critical_structure_ok: bool,
    pub no_critical_point_in_interval: bool,
    pub interval_between_b2_b3: bool,
    pub derivative_nonvanishing: bool,
    pub interval_mapped_onto_itself: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn derivative_nonvanishing_on_interval(r: &RationalMap) -> bool {
    let crit_inside = r.critical_numerator().real_roots().iter().any(|&x| (-1.0..=1.0).contains(&x));
    let pole_inside = r.den.real_roots().iter().any(|&x| (-1.0..=1.0).contains(&x));
    !crit_inside && !pole_inside && r.critical_numerator().eval(-1.0) != 0.0
}

fn interval_mapped_onto_itself(r: &RationalMap) -> bool {
    let (lo, hi) = (r.eval_real(-1.0), r.eval_real(1.0));
    let is_end = |v: f64| (v.abs() - 1.0).abs() < 1e-9;
    is_end(lo) && is_end(hi) && (lo - hi).abs() > 1.0
}

/// Checks that R belongs to the PS-3 component treated here.
pub fn validate_ps3_component(r: &RationalMap) -> ValidationReport {
    let mut rep = ValidationReport {
        degree_ok: r.degree() == 3,
        critical_structure_ok: false,
        no_critical_point_in_interval: false,
        interval_between_b2_b3: false,
        derivative_nonvanishing: derivative_nonvanishing_on_interval(r),
        interval_mapped_onto_itself: interval_mapped_onto_itself(r),
        failures: Vec::new(),
    };
    if !rep.degree_ok {
        rep.failures.push(format!("degree is {}, expected 3", r.degree()));
    }
    if rep.degree_ok {
        match r.critical_structure() {
            Ok(cs) => {
                rep.critical_structure_ok = true;
                if cs.a.iter().any(|&v| (v.abs() - 1.0).abs() < 1e-12) {
                    rep.critical_structure_ok = false;
                    rep.failures.push("a branch value equals ±1".into());
                }
                rep.no_critical_point_in_interval = !cs.b.iter().any(|&x| (-1.0..=1.0).contains(&x));
                if !rep.no_critical_point_in_interval {
                    rep.failures.push("critical point inside [-1, 1]".into());
                }
                let (b2, b3) = (cs.b[1], cs.b[2]);
                let inside = |x: f64| in_positive_arc(x, b2, b3);
                let (lo, hi) = if !inside(cs.b[0]) && !inside(cs.b[3]) { (b2, b3) } else { (b3, b2) };
                rep.interval_between_b2_b3 = [-1.0, 1.0].iter().all(|&x| in_positive_arc(x, lo, hi));
                if !rep.interval_between_b2_b3 {
                    rep.failures.push("[-1, 1] is not inside (b2, b3)".into());
                }
            }
            Err(e) => rep.failures.push(format!("critical structure: {e}")),
        }
    }
    if !rep.derivative_nonvanishing {
        rep.failures.push("R' vanishes or R has a pole on [-1, 1]".into());
    }
    if !rep.interval_mapped_onto_itself {
        rep.failures.push("R does not map [-1, 1] onto itself".into());
    }
    rep
}

/// Checks for the degree-2 maps accepted by the solver.
pub fn validate_quadratic(r: &RationalMap) -> ValidationReport {
    let mut rep = ValidationReport {
        degree_ok: r.degree() == 2,
        critical_structure_ok: true,
        no_critical_point_in_interval: true,
        interval_between_b2_b3: true,
        derivative_nonvanishing: derivative_nonvanishing_on_interval(r),
        interval_mapped_onto_itself: interval_mapped_onto_itself(r),
        failures: Vec::new(),
    };
    if !rep.degree_ok {
        rep.failures.push(format!("degree is {}, expected 2", r.degree()));
    }
    if !rep.derivative_nonvanishing {
        rep.no_critical_point_in_interval = false;
        rep.failures.push("R' vanishes or R has a pole on [-1, 1]".into());
    }
    if !rep.interval_mapped_onto_itself {
        rep.failures.push("R does not map [-1, 1] onto itself".into());
    }
    rep
}

/// Validation dispatching on the degree of the map.
pub fn validate_for_solver(r: &RationalMap) -> ValidationReport {
    if r.degree() == 2 {
        validate_quadratic(r)
    } else {
        validate_ps3_component(r)
    }
}

pub fn b_of_c(c: f64) -> f64 {
    c * (3.0 * c - 2.0) / (2.0 * c - 1.0)
}

pub fn a_of_c(c: f64) -> f64 {
    c * (3.0 * c - 2.0).powi(3) / (2.0 * c - 1.0)
}

/// Result of `reconstruct_from_a`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reconstruction {
    pub c: f64,
    pub b: f64,
    pub map: RationalMap,
    pub structure: CriticalStructure,
}

/// Finds c ∈ (1/3, 1/2) with a(c) = a, builds x²L(x) and verifies its
/// critical points {0, 1, b, ∞} and values {0, 1, a, ∞}.
pub fn reconstruct_from_a(a: f64) -> Result<Reconstruction> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::ReconstructionFailed(format!("need a > 1, got {a}")));
    }
    let (mut lo, mut hi) = (1.0 / 3.0 + 1e-9, 0.5 - 1e-9);
    if !(a_of_c(lo) < a && a < a_of_c(hi)) {
        return Err(Error::ReconstructionFailed(format!("a = {a} outside the bracket")));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if a_of_c(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = if (a_of_c(lo) - a).abs() <= (a_of_c(hi) - a).abs() { lo } else { hi };
    let b = b_of_c(c);
    let map = RationalMap::normalized_cubic(c).map_err(|e| Error::ReconstructionFailed(e.to_string()))?;
    let structure = map.critical_structure().map_err(|e| Error::ReconstructionFailed(e.to_string()))?;
    let want_b = [0.0, 1.0, b, f64::INFINITY];
    let want_a = [0.0, 1.0, a, f64::INFINITY];
    for s in 0..4 {
        let ok_b = real_close(structure.b[s], want_b[s], 1e-9);
        let ok_a = if want_a[s].is_infinite() {
            structure.a[s].is_infinite()
        } else {
            (structure.a[s] - want_a[s]).abs() <= 1e-9 * want_a[s].abs().max(1.0)
        };
        if !ok_a || !ok_b {
            return Err(Error::ReconstructionFailed(format!(
                "a posteriori check failed at s = {}: b = {}, a = {}",
                s + 1,
                structure.b[s],
                structure.a[s]
            )));
        }
    }
    Ok(Reconstruction { c, b, map, structure })
}

/// Which real preimage segment of L_a[−1, 1] is used as the new [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RedSegmentChoice {
    /// Segment inside (1, b), in the annulus between the two ovals.
    #[default]
    Annulus,
    /// Segment inside (c, 1).
    Inner,
    /// Segment inside (b, ∞).
    Outer,
}

/// Output of `assemble_full_map`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assembly {
    pub map: RationalMap,
    pub la: Mobius,
    pub lb: Mobius,
    pub a_normalized: f64,
    pub reconstruction: Reconstruction,
}

fn cyclically_increasing(a: &[f64; 4]) -> bool {
    let tau = 2.0 * std::f64::consts::PI;
    let base = cyclic_angle(a[0]);
    let rel: Vec<f64> = a.iter().map(|&x| (cyclic_angle(x) - base).rem_euclid(tau)).collect();
    rel[0] < rel[1] && rel[1] < rel[2] && rel[2] < rel[3]
}

/// Assembles a degree-3 map with branch values a₁..a₄ (cyclically increasing)
/// that sends [−1, 1] onto itself with R(±1) = ±1.
pub fn assemble_full_map(a: [f64; 4], choice: RedSegmentChoice) -> Result<Assembly> {
    if !cyclically_increasing(&a) {
        return Err(Error::ReconstructionFailed("branch values must be distinct and cyclically increasing".into()));
    }
    let la = Mobius::from_three_points([a[0], a[1], a[3]], [0.0, 1.0, f64::INFINITY])
        .map_err(|e| Error::ReconstructionFailed(e.to_string()))?;
    let an = la.apply(a[2]);
    let (ylo, yhi) = (la.apply(-1.0), la.apply(1.0));
    for y in [ylo, yhi] {
        if !(y > 1.0 && y < an) {
            return Err(Error::ReconstructionFailed("[-1, 1] is not inside the (3:0) arc between a2 and a3".into()));
        }
    }
    let rec = reconstruct_from_a(an)?;
    let (lo, hi) = match choice {
        RedSegmentChoice::Annulus => (1.0, rec.b),
        RedSegmentChoice::Inner => (rec.c, 1.0),
        RedSegmentChoice::Outer => (rec.b, f64::INFINITY),
    };
    let pick = |y: f64| -> Result<f64> {
        rec.map
            .preimages_real(y)
            .into_iter()
            .filter_map(|e| e.finite())
            .filter(|z| z.im == 0.0 && z.re > lo && z.re < hi)
            .map(|z| z.re)
            .next()
            .ok_or_else(|| Error::ReconstructionFailed("preimage segment not found".into()))
    };
    let (xlo, xhi) = (pick(ylo)?, pick(yhi)?);
    let b = Mobius::from_three_points([-1.0, 1.0, f64::INFINITY], [xlo, xhi, -1.0])
        .map_err(|e| Error::ReconstructionFailed(e.to_string()))?;
    let map = rec.map.precompose(&b).postcompose(&la.inverse());
    Ok(Assembly { map, la, lb: b.inverse(), a_normalized: an, reconstruction: rec })
}

/// Branch values of the test instance whose red window is
/// [1 + f₀(a − 1), 1 + f₁(a − 1)] in normalized coordinates, with the point
/// −1 of the normalized target line sent to infinity.
pub fn instance_branch_values(a: f64, window: (f64, f64)) -> Result<[f64; 4]> {
    let (f0, f1) = window;
    if !(0.0 < f0 && f0 < f1 && f1 < 1.0) {
        return Err(Error::InvalidInput(format!("window {window:?} must satisfy 0 < f0 < f1 < 1")));
    }
    let ylo = 1.0 + f0 * (a - 1.0);
    let yhi = 1.0 + f1 * (a - 1.0);
    let m = Mobius::from_three_points([ylo, yhi, -1.0], [-1.0, 1.0, f64::INFINITY])?;
    Ok([m.apply(0.0), m.apply(1.0), m.apply(a), m.apply(f64::INFINITY)])
}

/// Convenience wrapper: assembled PS-3 map for a normalized parameter a and
/// a red window.
pub fn ps3_instance(a: f64, window: (f64, f64)) -> Result<RationalMap> {
    Ok(assemble_full_map(instance_branch_values(a, window)?, RedSegmentChoice::Annulus)?.map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Ext {
        Ext::real(x)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(RationalMap::identity().eval(c(2.5)), c(2.5));
        let q = RationalMap::quadratic(2.0).unwrap();
        assert!((q.eval_real(1.0) - 1.0).abs() < 1e-15);
        let r = RationalMap::normalized_cubic(0.4).unwrap();
        assert!(r.eval_real(4.0).abs() < 1e-14);
        assert!(r.eval_real(0.4).is_infinite());
        assert!(r.eval(Ext::Infinity).is_infinite());
    }

    #[test]
    fn preimages_of_quadratic() {
        let cc = 2.0;
        let q = RationalMap::quadratic(cc).unwrap();
        let x0 = 0.3;
        let pre = q.preimages_real(q.eval_real(x0));
        let mut re: Vec<f64> = pre.iter().map(|e| e.finite().unwrap().re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] - (-x0 - 2.0 * cc)).abs() < 1e-12);
        assert!((re[1] - x0).abs() < 1e-12);
    }

    #[test]
    fn preimages_of_zero_for_cubic() {
        let r = RationalMap::normalized_cubic(0.4).unwrap();
        let pre = r.preimages_real(0.0);
        assert_eq!(pre.len(), 3);
        let mut re: Vec<f64> = pre.iter().map(|e| e.finite().unwrap().re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(re[0].abs() < 1e-7 && re[1].abs() < 1e-7);
        assert!((re[2] - 4.0).abs() < 1e-12);
        let inf = r.preimages(Ext::Infinity);
        assert_eq!(inf.iter().filter(|e| e.is_infinite()).count(), 2);
    }

    #[test]
    fn critical_structure_of_normalized_cubic() {
        let r = RationalMap::normalized_cubic(0.4).unwrap();
        let cs = r.critical_structure().unwrap();
        let want_b = [0.0, 1.0, 1.6, f64::INFINITY];
        let want_a = [0.0, 1.0, 1.024, f64::INFINITY];
        for s in 0..3 {
            assert!((cs.b[s] - want_b[s]).abs() < 1e-10, "{:?}", cs);
            assert!((cs.a[s] - want_a[s]).abs() < 1e-10, "{:?}", cs);
        }
        assert!(cs.b[3].is_infinite() && cs.a[3].is_infinite());
        assert!((cs.c[0] - 4.0).abs() < 1e-10);
        assert!((cs.c[3] - 0.4).abs() < 1e-12);
        for s in 0..3 {
            assert!((r.eval_real(cs.c[s]) - cs.a[s]).abs() < 1e-9);
        }
    }

    #[test]
    fn critical_structure_rejections() {
        assert!(matches!(RationalMap::quadratic(3.0).unwrap().critical_structure(), Err(Error::InvalidInput(_))));
        let r = RationalMap::new(vec![0.0, 3.0, 0.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(r.critical_structure(), Err(Error::NotInComponent(_))));
    }

    #[test]
    fn classify_points_of_normalized_cubic() {
        let r = RationalMap::normalized_cubic(0.4).unwrap();
        assert_eq!(r.classify_point(1.01).unwrap(), PointType::ThreeZero);
        assert_eq!(r.classify_point(0.5).unwrap(), PointType::OneTwo);
        assert_eq!(r.classify_point(5.0).unwrap(), PointType::OneTwo);
        assert_eq!(r.classify_point(-3.0).unwrap(), PointType::ThreeZero);
        assert!(matches!(r.classify_point(0.0), Err(Error::AtBranchPoint(_))));
    }

    #[test]
    fn coprimality_enforced() {
        assert!(RationalMap::new(vec![-1.0, 0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RationalMap::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn reconstruction_examples() {
        let r = reconstruct_from_a(1.024).unwrap();
        assert!((r.c - 0.4).abs() < 1e-12);
        assert!((r.b - 1.6).abs() < 1e-10);
        assert!(matches!(reconstruct_from_a(0.5), Err(Error::ReconstructionFailed(_))));
        assert!((b_of_c(1.0 / 3.0) - 1.0).abs() < 1e-15);
        assert!((a_of_c(1.0 / 3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn assembled_instance_is_valid() {
        let av = instance_branch_values(5.0, (0.3, 0.7)).unwrap();
        let asm = assemble_full_map(av, RedSegmentChoice::Annulus).unwrap();
        let rep = validate_ps3_component(&asm.map);
        assert!(rep.passed(), "{:?}", rep);
        let cs = asm.map.critical_structure().unwrap();
        for s in 0..4 {
            assert!((cs.a[s] - av[s]).abs() < 1e-8 * av[s].abs().max(1.0), "{:?} {:?}", cs.a, av);
        }
    }

    #[test]
    fn other_segment_choices_leave_the_annulus() {
        let av = instance_branch_values(5.0, (0.3, 0.7)).unwrap();
        for ch in [RedSegmentChoice::Inner, RedSegmentChoice::Outer] {
            let asm = assemble_full_map(av, ch).unwrap();
            assert!((asm.map.eval_real(1.0) - 1.0).abs() < 1e-9);
            assert!(!validate_ps3_component(&asm.map).interval_between_b2_b3);
        }
    }

    #[test]
    fn ungauged_cubic_fails_validation() {
        let rep = validate_ps3_component(&RationalMap::normalized_cubic(0.4).unwrap());
        assert!(!rep.passed());
        assert!(!rep.no_critical_point_in_interval);
        assert!(!rep.derivative_nonvanishing);
        let rep2 = validate_ps3_component(&RationalMap::quadratic(2.0).unwrap());
        assert!(!rep2.degree_ok);
    }

    #[test]
    fn gauge_examples() {
        let q = RationalMap::quadratic(2.0).unwrap();
        let id = Mobius::identity();
        let same = q.gauge_transform(&id, &id).unwrap();
        assert!((same.eval_real(0.37) - q.eval_real(0.37)).abs() < 1e-14);
        let flip = Mobius::new(-1.0, 0.0, 0.0, 1.0).unwrap();
        let g = q.gauge_transform(&flip, &id).unwrap();
        assert!((g.eval_real(0.37) - q.eval_real(-0.37)).abs() < 1e-14);
        let bad = Mobius::new(1.0, 0.5, 0.0, 1.0).unwrap();
        assert!(matches!(q.gauge_transform(&bad, &id), Err(Error::InvalidGauge(_))));
    }

    #[test]
    fn json_round_trip() {
        let r = RationalMap::normalized_cubic(0.4).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with("{\"num\":"));
        let back: RationalMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
