//! Monodromy data of the Riemann problem attached to an eigenvalue λ: the
//! matrices D, D₂, D₃, the invariant form J, the transfer matrix K, the
//! stereographic coordinates p± on the quadric J = J₀ and the spinor map χ.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type C3 = Vector3<Complex64>;
pub type CMat3 = Matrix3<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Primitive cube root of unity exp(2πi/3).
pub fn epsilon() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// Generators of the monodromy group; D belongs to the red slot, D₂ to the
/// green slot and D₃ to the blue slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    D,
    D2,
    D3,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::D, Generator::D2, Generator::D3];
}

#[derive(Debug, Clone)]
pub struct MonodromySystem {
    pub lambda: f64,
    pub delta: f64,
    pub mu: Complex64,
    pub eps: Complex64,
    pub d: Matrix3<f64>,
    pub d2: Matrix3<f64>,
    pub d3: Matrix3<f64>,
    pub k: CMat3,
    pub k_inv: CMat3,
}

/// Matrix of the bilinear form with J(W) = Wᵀ G W.
pub fn form_matrix(delta: f64) -> Matrix3<f64> {
    let h = -0.5 * delta;
    Matrix3::new(1.0, h, h, h, 1.0, h, h, h, 1.0)
}

impl MonodromySystem {
    pub fn build(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || [0.0, 1.0, 3.0].iter().any(|&x| (lambda - x).abs() < 1e-12) {
            return Err(Error::ExcludedParameter(lambda));
        }
        let delta = 2.0 / (lambda - 1.0);
        let mu = (c((3.0 - lambda) / (2.0 * lambda))).sqrt();
        let eps = epsilon();
        let d = Matrix3::new(-1.0, delta, delta, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let d2 = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
        let d3 = Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let one = c(1.0);
        let e2 = eps * eps;
        let f = CMat3::new(one, one, one, one, e2, eps, one, eps, e2);
        let p = CMat3::new(c(0.0), one / mu, c(0.0), c(0.0), c(0.0), one, one, c(0.0), c(0.0));
        let k = f * p / c(3.0 * delta + 6.0).sqrt();
        let k_inv = k.try_inverse().ok_or(Error::ExcludedParameter(lambda))?;
        let sys = MonodromySystem { lambda, delta, mu, eps, d, d2, d3, k, k_inv };
        let g = form_matrix(delta);
        for m in [&sys.d, &sys.d2, &sys.d3] {
            let inv = (m * m - Matrix3::identity()).amax();
            let form = (m.transpose() * g * m - g).amax();
            if inv > 1e-12 * (1.0 + delta.abs()) || form > 1e-12 * (1.0 + delta * delta) {
                return Err(Error::DomainError(format!("monodromy invariants fail at λ = {lambda}")));
            }
        }
        Ok(sys)
    }

    pub fn matrix(&self, g: Generator) -> Matrix3<f64> {
        match g {
            Generator::D => self.d,
            Generator::D2 => self.d2,
            Generator::D3 => self.d3,
        }
    }

    pub fn matrix_c(&self, g: Generator) -> CMat3 {
        self.matrix(g).map(c)
    }

    /// J(W) = Σ W_k² − δ Σ_{j<s} W_j W_s.
    pub fn j_eval(&self, w: &C3) -> Complex64 {
        w[0] * w[0] + w[1] * w[1] + w[2] * w[2] - self.delta * (w[0] * w[1] + w[0] * w[2] + w[1] * w[2])
    }

    /// Stereographic coordinates p± of W on the quadric J = J₀, where
    /// `j0root` is the chosen square root of J₀.
    pub fn p_from_w(&self, w: &C3, j0root: Complex64) -> Result<(Complex64, Complex64)> {
        let v = self.k_inv * w;
        let scale = v.norm().max(f64::MIN_POSITIVE);
        let ir = I * j0root;
        let first = v[0].norm();
        let plus_den = (v[1] - ir).norm();
        let minus_den = (v[1] + ir).norm();
        let p_plus = if first >= plus_den {
            if first <= 1e-14 * scale {
                return Err(Error::OnSingularLocus);
            }
            (v[1] + ir) / v[0]
        } else {
            v[2] / (v[1] - ir)
        };
        let p_minus = if first >= minus_den {
            if first <= 1e-14 * scale {
                return Err(Error::OnSingularLocus);
            }
            (v[1] - ir) / v[0]
        } else {
            v[2] / (v[1] + ir)
        };
        Ok((p_plus, p_minus))
    }

    /// W = (2i√J₀/(p⁺ − p⁻)) K (1, (p⁺ + p⁻)/2, p⁺p⁻)ᵀ.
    pub fn w_from_p(&self, p_plus: Complex64, p_minus: Complex64, j0root: Complex64) -> Result<C3> {
        let diff = p_plus - p_minus;
        if diff.norm() <= 1e-14 * (1.0 + p_plus.norm().max(p_minus.norm())) {
            return Err(Error::DegeneratePair);
        }
        let s = c(2.0) * I * j0root / diff;
        let v = C3::new(c(1.0), (p_plus + p_minus) * 0.5, p_plus * p_minus);
        Ok(self.k * v * s)
    }

    /// χ of a generator as a linear-fractional map.
    pub fn chi_generator(&self, g: Generator) -> MobiusC {
        let e = self.eps;
        let m = match g {
            Generator::D => Matrix2::new(self.mu, c(-1.0), c(1.0), -self.mu),
            Generator::D2 => Matrix2::new(c(0.0), e * e, c(1.0), c(0.0)),
            Generator::D3 => Matrix2::new(c(0.0), e, c(1.0), c(0.0)),
        };
        MobiusC::new(m).expect("generator images are invertible")
    }

    /// T = (ad − bc)⁻¹ K S(M) K⁻¹ with the symmetric-square matrix S(M).
    pub fn chi_of_t(&self, m: &MobiusC) -> CMat3 {
        let (a, b, cc, d) = (m.m[(0, 0)], m.m[(0, 1)], m.m[(1, 0)], m.m[(1, 1)]);
        let two = c(2.0);
        let s = CMat3::new(d * d, two * cc * d, cc * cc, b * d, a * d + b * cc, a * cc, b * b, two * a * b, a * a);
        self.k * s * self.k_inv / (a * d - b * cc)
    }
}

/// Projective 2 × 2 complex matrix, stored with det = 1 and the first
/// non-negligible entry having positive real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusC {
    pub m: Matrix2<Complex64>,
}

impl MobiusC {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        let det = m.determinant();
        let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if det.norm() <= 1e-14 * scale * scale || scale == 0.0 {
            return Err(Error::InvalidInput("singular linear-fractional map".into()));
        }
        let mut n = m / det.sqrt();
        let nscale = n.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if let Some(first) = [n[(0, 0)], n[(0, 1)], n[(1, 0)], n[(1, 1)]].iter().find(|z| z.norm() > 1e-12 * nscale) {
            if first.re < 0.0 || (first.re == 0.0 && first.im < 0.0) {
                n = -n;
            }
        }
        Ok(MobiusC { m: n })
    }

    pub fn identity() -> Self {
        MobiusC { m: Matrix2::identity() }
    }

    pub fn apply(&self, p: Complex64) -> Complex64 {
        (self.m[(0, 0)] * p + self.m[(0, 1)]) / (self.m[(1, 0)] * p + self.m[(1, 1)])
    }

    /// self ∘ other.
    pub fn compose(&self, other: &MobiusC) -> MobiusC {
        MobiusC::new(self.m * other.m).expect("product of invertible maps")
    }

    /// Max entrywise distance modulo the sign ambiguity.
    pub fn projective_distance(&self, other: &MobiusC) -> f64 {
        let plus = (self.m - other.m).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let minus = (self.m + other.m).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        plus.min(minus)
    }
}

fn max_abs(m: &CMat3) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Residuals of the identity battery at a single λ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfCheckEntry {
    pub lambda: f64,
    pub involutivity: f64,
    pub j_conservation: f64,
    pub generator_lift: f64,
    pub homomorphism: f64,
    pub p_transformation: f64,
    pub fixed_points_on_unit_circle: f64,
    pub round_trip: f64,
}

impl SelfCheckEntry {
    pub fn max_residual(&self) -> f64 {
        [
            self.involutivity,
            self.j_conservation,
            self.generator_lift,
            self.homomorphism,
            self.p_transformation,
            self.fixed_points_on_unit_circle,
            self.round_trip,
        ]
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfCheckReport {
    pub tolerance: f64,
    pub entries: Vec<SelfCheckEntry>,
    pub skipped: Vec<(f64, String)>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.max_residual() < self.tolerance)
    }
}

/// Default λ grid: 50 points in (1, 2).
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=50).map(|k| 1.0 + k as f64 / 51.0).collect()
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_w(rng: &mut ChaCha8Rng) -> C3 {
    C3::new(random_c(rng), random_c(rng), random_c(rng))
}

/// Runs the identity battery. With `inject_sign_error` the matrix D is
/// replaced by one with a flipped entry, which must make the battery fail.
pub fn selfcheck(lambdas: &[f64], inject_sign_error: bool) -> SelfCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f_6e6f);
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for &lambda in lambdas {
        let mut sys = match MonodromySystem::build(lambda) {
            Ok(s) => s,
            Err(e) => {
                skipped.push((lambda, e.to_string()));
                continue;
            }
        };
        if inject_sign_error {
            sys.d[(0, 1)] = -sys.d[(0, 1)];
        }
        entries.push(check_one(&sys, &mut rng));
    }
    SelfCheckReport { tolerance: 1e-10, entries, skipped }
}

fn check_one(sys: &MonodromySystem, rng: &mut ChaCha8Rng) -> SelfCheckEntry {
    let id = CMat3::identity();
    let involutivity =
        Generator::ALL.iter().map(|&g| max_abs(&(sys.matrix_c(g) * sys.matrix_c(g) - id))).fold(0.0, f64::max);

    let mut j_conservation: f64 = 0.0;
    for _ in 0..200 {
        let w = random_w(rng);
        let j = sys.j_eval(&w);
        for g in Generator::ALL {
            let jd = sys.j_eval(&(sys.matrix_c(g) * w));
            j_conservation = j_conservation.max((jd - j).norm() / (1.0 + w.norm_squared() * (1.0 + sys.delta.abs())));
        }
    }

    // χ(D_*) lifts back to −D_* (every generator has determinant −1).
    let generator_lift = Generator::ALL
        .iter()
        .map(|&g| max_abs(&(sys.chi_of_t(&sys.chi_generator(g)) + sys.matrix_c(g))))
        .fold(0.0, f64::max);

    let mut homomorphism: f64 = 0.0;
    for _ in 0..20 {
        let word = |rng: &mut ChaCha8Rng| -> (MobiusC, CMat3, usize) {
            let len = rng.gen_range(1..=3);
            let mut m = MobiusC::identity();
            let mut t = CMat3::identity();
            for _ in 0..len {
                let g = Generator::ALL[rng.gen_range(0..3)];
                m = m.compose(&sys.chi_generator(g));
                t *= sys.matrix_c(g);
            }
            (m, t, len)
        };
        let (mg, tg, lg) = word(rng);
        let (mh, th, lh) = word(rng);
        let lifted = sys.chi_of_t(&mg.compose(&mh));
        let sign = if (lg + lh) % 2 == 0 { 1.0 } else { -1.0 };
        let prod = tg * th * c(sign);
        homomorphism = homomorphism.max(max_abs(&(lifted - prod)) / (1.0 + max_abs(&prod)));
    }

    let mut p_transformation: f64 = 0.0;
    for _ in 0..20 {
        let m = match MobiusC::new(Matrix2::new(random_c(rng), random_c(rng), random_c(rng), random_c(rng))) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let t = sys.chi_of_t(&m);
        let w = random_w(rng);
        let root = sys.j_eval(&w).sqrt();
        if let (Ok((pp, pm)), Ok((tp, tm))) = (sys.p_from_w(&w, root), sys.p_from_w(&(t * w), root)) {
            let rel = |a: Complex64, b: Complex64| (a - b).norm() / (1.0 + a.norm().max(b.norm()));
            p_transformation = p_transformation.max(rel(tp, m.apply(pp))).max(rel(tm, m.apply(pm)));
        }
        // Orientation-reversing generators swap the superscripts.
        for g in Generator::ALL {
            let chi = sys.chi_generator(g);
            if let (Ok((pp, pm)), Ok((dp, dm))) = (sys.p_from_w(&w, root), sys.p_from_w(&(sys.matrix_c(g) * w), root)) {
                let rel = |a: Complex64, b: Complex64| (a - b).norm() / (1.0 + a.norm().max(b.norm()));
                p_transformation = p_transformation.max(rel(dp, chi.apply(pm))).max(rel(dm, chi.apply(pp)));
            }
        }
    }

    // Fixed points of χ(D) solve p² − 2μp + 1 = 0.
    let disc = (sys.mu * sys.mu - 1.0).sqrt();
    let fixed_points_on_unit_circle = [sys.mu + disc, sys.mu - disc]
        .iter()
        .map(|p| {
            let chi = sys.chi_generator(Generator::D);
            let moved = (chi.apply(*p) - p).norm();
            let circle = if sys.mu.im == 0.0 && sys.mu.re.abs() < 1.0 { (p.norm() - 1.0).abs() } else { 0.0 };
            moved.max(circle)
        })
        .fold(0.0, f64::max);

    let mut round_trip: f64 = 0.0;
    for _ in 0..20 {
        let (pp, pm) = (random_c(rng), random_c(rng));
        let root = random_c(rng);
        if let Ok(w) = sys.w_from_p(pp, pm, root) {
            let jerr = (sys.j_eval(&w) - root * root).norm() / (1.0 + w.norm_squared() * (1.0 + sys.delta));
            round_trip = round_trip.max(jerr);
            if let Ok((qp, qm)) = sys.p_from_w(&w, root) {
                round_trip = round_trip.max((qp - pp).norm().max((qm - pm).norm()));
            }
        }
    }

    SelfCheckEntry {
        lambda: sys.lambda,
        involutivity,
        j_conservation,
        generator_lift,
        homomorphism,
        p_transformation,
        fixed_points_on_unit_circle,
        round_trip,
    }
}
