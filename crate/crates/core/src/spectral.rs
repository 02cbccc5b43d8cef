//! Eigenpairs of the discretized equation
//! λ·PV∫u/(t−x) − PV∫u R′/(R(t)−R(x)) = const on (−1, 1).
//!
//! With u = √(1−t²) Σ c_n U_{n−1}, projection on T_m (m ≥ 1) gives
//! −(π²/2)(λ − 1) c = A c, so each eigenvalue ν of the Galerkin matrix yields
//! λ = 1 − 2ν/π².

use crate::error::{Error, Result};
use crate::quadrature::{assemble_galerkin_with, cheb_t, GalerkinMatrix, SmoothKernel};
use crate::rational_map::{validate_for_solver, RationalMap};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Number of probe points of the residual check.
pub const RESIDUAL_PROBES: usize = 64;
/// Pairs with |λ − 1| above this are treated as resolved by the truncation.
pub const CONVERGED_GAP: f64 = 1e-4;
const PROBE_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone)]
pub struct SpectralProblem {
    pub map: RationalMap,
    pub n: usize,
    pub order: usize,
}

impl SpectralProblem {
    pub fn new(map: RationalMap, n: usize) -> Result<Self> {
        Self::with_order(map, n, 2 * n + 16)
    }

    pub fn with_order(map: RationalMap, n: usize, order: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("truncation N = {n} below 4")));
        }
        if map.degree() > 1 {
            let rep = validate_for_solver(&map);
            if !rep.passed() {
                return Err(Error::NotInComponent(rep.failures.join("; ")));
            }
        }
        Ok(SpectralProblem { map, n, order })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Antisymmetric,
    Symmetric,
    Unclassified,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// Chebyshev coefficients c₁..c_N, max-norm 1, first significant one positive.
    pub coefficients: Vec<f64>,
    /// Max residual of the continuous equation over the probe points, with
    /// the constant fitted by least squares.
    pub residual: f64,
    /// ‖A c − ν c‖ of the discrete problem.
    pub matrix_residual: f64,
    pub symmetry: Symmetry,
}

impl EigenPair {
    /// Synthetic pair, used for negative controls and tests.
    pub fn from_coefficients(lambda: f64, coefficients: Vec<f64>) -> Self {
        EigenPair {
            lambda,
            coefficients,
            residual: f64::NAN,
            matrix_residual: f64::NAN,
            symmetry: Symmetry::Unclassified,
        }
    }

    pub fn is_converged(&self) -> bool {
        (self.lambda - 1.0).abs() > CONVERGED_GAP
    }

    /// L² norm of u on (−1, 1).
    pub fn u_norm(&self) -> f64 {
        (0.5 * PI * self.coefficients.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
    pub n: usize,
    pub order: usize,
    /// Eigenvalues λ with a significant imaginary part, excluded from `pairs`.
    pub spurious: Vec<(f64, f64)>,
    pub convergence_warning: bool,
}

impl Spectrum {
    pub fn converged(&self) -> impl Iterator<Item = &EigenPair> {
        self.pairs.iter().filter(|p| p.is_converged())
    }
}

/// u(x) = √(1 − x²) Σ c_n U_{n−1}(x) = Σ c_n sin(nθ), x = cos θ.
pub fn eigenfunction_eval(pair: &EigenPair, x: f64) -> f64 {
    u_from_coefficients(&pair.coefficients, x)
}

pub fn u_from_coefficients(c: &[f64], x: f64) -> f64 {
    let th = x.clamp(-1.0, 1.0).acos();
    c.iter().enumerate().map(|(k, v)| v * ((k + 1) as f64 * th).sin()).sum()
}

/// Σ c_n U_{n−1}(cos θ) = Σ c_n sin(nθ) / sin θ.
fn interior_factor(c: &[f64], th: f64) -> f64 {
    let s: f64 = c.iter().enumerate().map(|(k, v)| v * ((k + 1) as f64 * th).sin()).sum();
    s / th.sin()
}

fn normalize(v: &mut DVector<f64>) {
    let m = v.amax();
    if m > 0.0 {
        *v /= m;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
        if *first < 0.0 {
            *v *= -1.0;
        }
    }
}

fn probe_points() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    (0..RESIDUAL_PROBES).map(|_| rng.gen_range(-0.98..0.98)).collect()
}

/// Eigenvector for the real eigenvalue ν by inverse iteration.
fn inverse_iteration(a: &DMatrix<f64>, nu: f64, start: usize, scale: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    let shift = nu + 1e-11 * scale.max(1e-8);
    let m = a - DMatrix::identity(n, n) * shift;
    let lu = m.lu();
    let mut v = DVector::from_fn(n, |i, _| {
        let base = if i == start % n { 1.0 } else { 0.0 };
        base + 1e-3 * (((i * 7919 + start * 104729) % 1000) as f64 / 1000.0 - 0.5)
    });
    v /= v.norm();
    for _ in 0..4 {
        let w = lu.solve(&v).ok_or_else(|| Error::SolverError("singular shifted matrix".into()))?;
        let nrm = w.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::SolverError("inverse iteration diverged".into()));
        }
        v = w / nrm;
    }
    Ok(v)
}

/// Real eigenpairs (ν, eigenvector) and the discarded complex eigenvalues.
pub type Decomposition = (Vec<(f64, DVector<f64>)>, Vec<Complex64>);

/// Real eigenvalues of the Galerkin matrix with their eigenvectors.
pub fn eigen_decompose(g: &GalerkinMatrix) -> Result<Decomposition> {
    let a = &g.a;
    let norm = a.norm();
    let eig = if norm == 0.0 {
        DVector::from_element(a.nrows(), Complex64::new(0.0, 0.0))
    } else {
        a.clone()
            .try_schur(f64::EPSILON, 10_000)
            .ok_or_else(|| Error::SolverError("Schur iteration did not converge".into()))?
            .complex_eigenvalues()
    };
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for z in eig.iter() {
        if z.im.abs() > 1e-8 * norm.max(f64::MIN_POSITIVE) {
            complex.push(*z);
        } else {
            real.push(z.re);
        }
    }
    real.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).unwrap().then(y.partial_cmp(x).unwrap()));
    let mut out = Vec::with_capacity(real.len());
    for (k, &nu) in real.iter().enumerate() {
        let mut v = inverse_iteration(a, nu, k, norm)?;
        normalize(&mut v);
        out.push((nu, v));
    }
    Ok((out, complex))
}

struct ResidualProbe {
    x: f64,
    kernel_row: Vec<f64>,
}

fn residual_probes(map: &RationalMap, order: usize) -> Result<Vec<ResidualProbe>> {
    let kernel = SmoothKernel::new(map);
    let nodes: Vec<f64> = (1..=order).map(|j| ((2 * j - 1) as f64 * PI / (2 * order) as f64).cos()).collect();
    probe_points()
        .into_iter()
        .map(|x| {
            let co = kernel.co_preimages(x)?;
            Ok(ResidualProbe { x, kernel_row: nodes.iter().map(|&t| kernel.eval_with(&co, t).0).collect() })
        })
        .collect()
}

/// Max over probes of |(λ − 1)(−π)Σ c_n T_n(x) − S[u](x) − const̂|.
fn continuous_residual(probes: &[ResidualProbe], order: usize, lambda: f64, c: &[f64]) -> f64 {
    let h = PI / order as f64;
    let weights: Vec<f64> = (1..=order)
        .map(|j| {
            let th = (2 * j - 1) as f64 * PI / (2 * order) as f64;
            let u: f64 = c.iter().enumerate().map(|(k, v)| v * ((k + 1) as f64 * th).sin()).sum();
            h * u * th.sin()
        })
        .collect();
    let raw: Vec<f64> = probes
        .iter()
        .map(|p| {
            let s: f64 = p.kernel_row.iter().zip(&weights).map(|(k, w)| k * w).sum();
            let pv: f64 = c.iter().enumerate().map(|(k, v)| v * cheb_t(k + 1, p.x)).sum();
            (lambda - 1.0) * (-PI) * pv - s
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.iter().fold(0.0, |m, r| m.max((r - mean).abs()))
}

/// Solves the truncated problem. Pairs come sorted by |λ − 1| descending.
pub fn solve(problem: &SpectralProblem) -> Result<Spectrum> {
    let g = assemble_galerkin_with(&problem.map, problem.n, Some(problem.order), true)?;
    let (pairs, complex) = eigen_decompose(&g)?;
    let res_order = 2 * problem.order;
    let probes = if problem.map.degree() > 1 { residual_probes(&problem.map, res_order)? } else { Vec::new() };
    let mut out = Vec::with_capacity(pairs.len());
    for (nu, v) in pairs {
        let lambda = 1.0 - 2.0 * nu / (PI * PI);
        let c: Vec<f64> = v.iter().copied().collect();
        let matrix_residual = (&g.a * &v - &v * nu).norm();
        let residual = if probes.is_empty() { 0.0 } else { continuous_residual(&probes, res_order, lambda, &c) };
        out.push(EigenPair { lambda, coefficients: c, residual, matrix_residual, symmetry: Symmetry::Unclassified });
    }
    let spurious: Vec<(f64, f64)> =
        complex.iter().map(|z| (1.0 - 2.0 * z.re / (PI * PI), -2.0 * z.im / (PI * PI))).collect();
    for (re, im) in &spurious {
        log::warn!("discarding complex eigenvalue λ = {re} + {im}i");
    }
    let convergence_warning =
        problem.n < 32 || out.iter().filter(|p| p.is_converged()).any(|p| p.residual > 1e-6 * p.u_norm().max(1.0));
    Ok(Spectrum { pairs: out, n: problem.n, order: problem.order, spurious, convergence_warning })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub interior: usize,
    pub endpoints: usize,
    pub locations: Vec<f64>,
    pub ambiguous: bool,
}

impl ZeroCount {
    pub fn total(&self) -> usize {
        self.interior + self.endpoints
    }
}

/// Sign changes of Σ c_n U_{n−1} on a 4096-point grid in θ, each located by
/// bisection, plus the two endpoint zeros of √(1 − x²).
pub fn count_zeros(pair: &EigenPair) -> ZeroCount {
    count_zeros_of(&pair.coefficients)
}

pub fn count_zeros_of(c: &[f64]) -> ZeroCount {
    const GRID: usize = 4096;
    let th: Vec<f64> = (1..=GRID).map(|k| k as f64 * PI / (GRID + 1) as f64).collect();
    let vals: Vec<f64> = th.iter().map(|&t| interior_factor(c, t)).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut locations = Vec::new();
    let mut ambiguous = false;
    for k in 0..GRID - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        if a.abs() <= 1e-10 * scale && k > 0 && (vals[k - 1] > 0.0) == (b > 0.0) {
            ambiguous = true;
        }
        if (a > 0.0) != (b > 0.0) && a != 0.0 && b != 0.0 {
            let (mut lo, mut hi) = (th[k], th[k + 1]);
            let mut flo = a;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = interior_factor(c, mid);
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            locations.push((0.5 * (lo + hi)).cos());
        }
    }
    locations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ZeroCount { interior: locations.len(), endpoints: 2, locations, ambiguous }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusReport {
    pub checked: usize,
    pub violations: Vec<f64>,
}

impl LocusReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every antisymmetric eigenvalue must lie in [1 − tol, 2) ∪ {3 ± tol}.
pub fn locus_check(spectrum: &Spectrum, tol: f64) -> LocusReport {
    locus_check_pairs(&spectrum.pairs, tol)
}

pub fn locus_check_pairs(pairs: &[EigenPair], tol: f64) -> LocusReport {
    let mut rep = LocusReport { checked: 0, violations: Vec::new() };
    for p in pairs.iter().filter(|p| p.symmetry == Symmetry::Antisymmetric) {
        rep.checked += 1;
        let l = p.lambda;
        let ok = (l >= 1.0 - tol && l < 2.0) || (l - 3.0).abs() <= tol;
        if !ok {
            rep.violations.push(l);
        }
    }
    rep
}

/// Σ |λ − 1|² over the computed eigenvalues.
pub fn tail_energy(spectrum: &Spectrum) -> f64 {
    spectrum.pairs.iter().map(|p| (p.lambda - 1.0).powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::QuadraticProblem;

    #[test]
    fn zero_kernel_gives_unit_spectrum() {
        let p = SpectralProblem::new(RationalMap::identity(), 8).unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.pairs.len(), 8);
        assert!(s.pairs.iter().all(|p| p.lambda == 1.0));
        assert_eq!(tail_energy(&s), 0.0);
    }

    #[test]
    fn quadratic_leading_eigenvalue() {
        let q = QuadraticProblem::new(3.0).unwrap();
        let p = SpectralProblem::new(RationalMap::quadratic(3.0).unwrap(), 32).unwrap();
        let s = solve(&p).unwrap();
        for n in 1..=3 {
            let want = q.lambda_n(n);
            assert!(((s.pairs[n - 1].lambda - want) / want).abs() < 1e-9);
        }
        assert!(s.pairs[0].residual < 1e-8);
    }

    #[test]
    fn eigenfunction_basics() {
        let p = EigenPair::from_coefficients(1.5, vec![1.0, 0.0, 0.0]);
        assert_eq!(eigenfunction_eval(&p, 1.0), 0.0);
        assert!(eigenfunction_eval(&p, -1.0).abs() < 1e-15);
        assert!((eigenfunction_eval(&p, 0.6) - 0.8).abs() < 1e-15);
        let z = count_zeros(&p);
        assert_eq!(z.interior, 0);
        assert_eq!(z.total(), 2);
        let p3 = EigenPair::from_coefficients(1.5, vec![0.0, 0.0, 1.0]);
        let z3 = count_zeros(&p3);
        assert_eq!(z3.interior, 2);
        assert!((z3.locations[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn locus_examples() {
        let mut s = Spectrum { pairs: vec![], n: 4, order: 24, spurious: vec![], convergence_warning: false };
        assert!(locus_check(&s, 1e-6).passed());
        let mut bad = EigenPair::from_coefficients(2.5, vec![1.0]);
        bad.symmetry = Symmetry::Antisymmetric;
        s.pairs.push(bad);
        let rep = locus_check(&s, 1e-6);
        assert_eq!(rep.violations, vec![2.5]);
    }

    #[test]
    fn small_truncation_rejected() {
        assert!(SpectralProblem::new(RationalMap::quadratic(2.0).unwrap(), 3).is_err());
    }
}
