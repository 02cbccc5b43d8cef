//! Chebyshev machinery, the airfoil principal-value identity, the smooth part
//! of the kernel R′(t)/(R(t) − R(x)) and the Galerkin matrix built from it.

use crate::error::{Error, Result};
use crate::poly::{Ext, Poly};
use crate::rational_map::RationalMap;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// T_n(x) by the three-term recurrence.
pub fn cheb_t(n: usize, x: f64) -> f64 {
    let (mut t0, mut t1) = (1.0, x);
    if n == 0 {
        return t0;
    }
    for _ in 1..n {
        let t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}

/// U_n(x) by the three-term recurrence.
pub fn cheb_u(n: usize, x: f64) -> f64 {
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    if n == 0 {
        return u0;
    }
    for _ in 1..n {
        let u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    u1
}

/// PV ∫₋₁¹ √(1−t²) U_{n−1}(t) / (t − x) dt = −π T_n(x).
pub fn pv_cauchy_of_basis(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "basis index starts at 1");
    -PI * cheb_t(n, x)
}

/// Gauss–Chebyshev grid in the angle variable, t_j = cos θ_j.
#[derive(Debug, Clone)]
pub struct ChebyshevGrid {
    pub n: usize,
    pub order: usize,
    pub theta: Vec<f64>,
    pub nodes: Vec<f64>,
}

impl ChebyshevGrid {
    /// Grid with the default quadrature order 2N + 16.
    pub fn new(n: usize) -> Self {
        Self::with_order(n, 2 * n + 16).expect("default order is admissible")
    }

    pub fn with_order(n: usize, order: usize) -> Result<Self> {
        if n == 0 || order < 2 * n + 8 {
            return Err(Error::InvalidInput(format!("quadrature order {order} too small for N = {n}")));
        }
        let theta: Vec<f64> = (1..=order).map(|j| (2 * j - 1) as f64 * PI / (2 * order) as f64).collect();
        let nodes = theta.iter().map(|t| t.cos()).collect();
        Ok(ChebyshevGrid { n, order, theta, nodes })
    }

    /// Uniform weight π/N′ of the rule in θ.
    pub fn weight(&self) -> f64 {
        PI / self.order as f64
    }
}

/// κ(t, x) = Σ_{k≥2} 1/(t − x_k(x)) − Q′(t)/Q(t).
#[derive(Debug, Clone)]
pub struct SmoothKernel {
    map: RationalMap,
    dq: Poly,
}

/// The non-identity preimages of R(x), with x itself removed.
#[derive(Debug, Clone)]
pub struct CoPreimages {
    pub x: f64,
    pub others: Vec<Ext>,
}

impl SmoothKernel {
    pub fn new(map: &RationalMap) -> Self {
        SmoothKernel { map: map.clone(), dq: map.den().derivative() }
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn co_preimages(&self, x: f64) -> Result<CoPreimages> {
        let y = self.map.eval_real(x);
        if !y.is_finite() {
            return Err(Error::KernelError(format!("pole of R at x = {x}")));
        }
        let mut pre = self.map.preimages_real(y);
        let me = Ext::real(x);
        let (idx, dist) = pre
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.chordal(me)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .ok_or_else(|| Error::KernelError("no preimages".into()))?;
        if dist > 1e-6 {
            return Err(Error::KernelError(format!("x = {x} not recovered among preimages")));
        }
        pre.remove(idx);
        Ok(CoPreimages { x, others: pre })
    }

    /// κ(t, x) for a precomputed preimage set; returns (Re, Im).
    pub fn eval_with(&self, co: &CoPreimages, t: f64) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for p in &co.others {
            if let Ext::Finite(z) = p {
                let w = 1.0 / (num_complex::Complex64::new(t, 0.0) - z);
                re += w.re;
                im += w.im;
            }
        }
        let q = self.map.den().eval(t);
        re -= self.dq.eval(t) / q;
        (re, im)
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let co = self.co_preimages(x)?;
        Ok(self.eval_with(&co, t).0)
    }
}

/// κ(t, x) of the map R.
pub fn smooth_kernel_eval(r: &RationalMap, t: f64, x: f64) -> Result<f64> {
    SmoothKernel::new(r).eval(t, x)
}

/// The full kernel R′(t)/(R(t) − R(x)).
pub fn full_kernel(r: &RationalMap, t: f64, x: f64) -> f64 {
    r.derivative_real(t) / (r.eval_real(t) - r.eval_real(x))
}

/// N × N matrix A_{mn} = ⟨T_m, S[√(1−t²) U_{n−1}]⟩ with weight 1/√(1−x²).
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinMatrix {
    pub n: usize,
    pub order: usize,
    pub a: DMatrix<f64>,
}

impl GalerkinMatrix {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:.17e}", self.a[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }
}

/// Kernel values κ(t_j, x_i) on the tensor grid, row i for x_i.
fn kernel_table(kernel: &SmoothKernel, grid: &ChebyshevGrid, parallel: bool) -> Result<Vec<Vec<f64>>> {
    let row = |x: &f64| -> Result<Vec<f64>> {
        let co = kernel.co_preimages(*x)?;
        Ok(grid.nodes.iter().map(|&t| kernel.eval_with(&co, t).0).collect())
    };
    if parallel {
        grid.nodes.par_iter().map(row).collect()
    } else {
        grid.nodes.iter().map(row).collect()
    }
}

/// Galerkin matrix for truncation N and quadrature order N′ (default 2N+16).
/// Parallel and sequential assembly give bit-identical results.
pub fn assemble_galerkin_with(
    r: &RationalMap,
    n: usize,
    order: Option<usize>,
    parallel: bool,
) -> Result<GalerkinMatrix> {
    let grid = match order {
        Some(o) => ChebyshevGrid::with_order(n, o)?,
        None => ChebyshevGrid::new(n),
    };
    let kernel = SmoothKernel::new(r);
    let k = kernel_table(&kernel, &grid, parallel)?;
    let np = grid.order;
    let s_basis: Vec<Vec<f64>> =
        grid.theta.iter().map(|&th| (1..=n).map(|m| th.sin() * (m as f64 * th).sin()).collect()).collect();
    let g_row = |i: usize| -> Vec<f64> {
        (0..n)
            .map(|col| {
                let mut acc = 0.0;
                for j in 0..np {
                    acc += k[i][j] * s_basis[j][col];
                }
                acc
            })
            .collect()
    };
    let g: Vec<Vec<f64>> =
        if parallel { (0..np).into_par_iter().map(g_row).collect() } else { (0..np).map(g_row).collect() };
    let w2 = grid.weight() * grid.weight();
    let a_row = |m: usize| -> Vec<f64> {
        (0..n)
            .map(|col| {
                let mut acc = 0.0;
                for (th, gi) in grid.theta.iter().zip(g.iter()) {
                    acc += ((m + 1) as f64 * th).cos() * gi[col];
                }
                w2 * acc
            })
            .collect()
    };
    let rows: Vec<Vec<f64>> =
        if parallel { (0..n).into_par_iter().map(a_row).collect() } else { (0..n).map(a_row).collect() };
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(GalerkinMatrix { n, order: np, a })
}

pub fn assemble_galerkin(r: &RationalMap, n: usize) -> Result<GalerkinMatrix> {
    assemble_galerkin_with(r, n, None, true)
}

/// S[u](x) = ∫ κ(t, x) u(t) dt for u = √(1−t²) Σ c_n U_{n−1}, by the
/// midpoint rule in θ with `order` nodes.
pub fn apply_smooth_operator(kernel: &SmoothKernel, coeffs: &[f64], x: f64, order: usize) -> Result<f64> {
    let co = kernel.co_preimages(x)?;
    let h = PI / order as f64;
    let mut acc = 0.0;
    for j in 1..=order {
        let th = (2 * j - 1) as f64 * PI / (2 * order) as f64;
        let u: f64 = coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * th).sin()).sum();
        acc += kernel.eval_with(&co, th.cos()).0 * u * th.sin();
    }
    Ok(h * acc)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_values() {
        assert!((cheb_t(3, 0.3) - (4.0 * 0.027 - 0.9)).abs() < 1e-15);
        assert!((cheb_u(2, 0.5) - 0.0).abs() < 1e-15);
        for n in 0..8 {
            let th: f64 = 0.7;
            assert!((cheb_t(n, th.cos()) - (n as f64 * th).cos()).abs() < 1e-13);
            assert!((cheb_u(n, th.cos()) * th.sin() - ((n + 1) as f64 * th).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn pv_examples() {
        assert_eq!(pv_cauchy_of_basis(1, 0.0), 0.0);
        assert!((pv_cauchy_of_basis(1, 0.5) + PI / 2.0).abs() < 1e-15);
        assert!((pv_cauchy_of_basis(3, 0.3) - PI * 0.792).abs() < 1e-14);
    }

    #[test]
    fn grid_nodes_symmetric_and_interior() {
        let g = ChebyshevGrid::new(8);
        assert_eq!(g.order, 32);
        for (i, &t) in g.nodes.iter().enumerate() {
            assert!(t.abs() < 1.0);
            assert!((t + g.nodes[g.order - 1 - i]).abs() < 1e-15);
        }
        assert!(ChebyshevGrid::with_order(8, 20).is_err());
    }

    #[test]
    fn quadratic_kernel_closed_form() {
        let c = 2.5;
        let r = RationalMap::quadratic(c).unwrap();
        for (t, x) in [(0.1, -0.4), (0.9, 0.9), (-0.7, 0.2)] {
            let k = smooth_kernel_eval(&r, t, x).unwrap();
            assert!((k - 1.0 / (t + x + 2.0 * c)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_kernel_gives_zero_matrix() {
        let r = RationalMap::identity();
        let g = assemble_galerkin(&r, 6).unwrap();
        assert!(g.a.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn parallel_assembly_is_bit_identical() {
        let r = RationalMap::quadratic(3.0).unwrap();
        let a = assemble_galerkin_with(&r, 12, None, true).unwrap();
        let b = assemble_galerkin_with(&r, 12, None, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
