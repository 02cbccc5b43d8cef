//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the numerical routines of the crate under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::mobius::Mobius;

/// K(k) from the hypergeometric series Σ [(2n)!/(2²ⁿ n!²)]² k²ⁿ.
pub fn k_series(k: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for n in 1..200_000 {
        let r = (2 * n - 1) as f64 / (2 * n) as f64;
        term *= r * r * k * k;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    PI / 2.0 * sum
}

/// τ = K(k)/K(k′) for the quadratic family, k = (C − 1)/(C + 1).
pub fn quadratic_tau(c: f64) -> f64 {
    let k = (c - 1.0) / (c + 1.0);
    k_series(k) / k_series((1.0 - k * k).sqrt())
}

pub fn quadratic_lambda(c: f64, n: usize) -> f64 {
    1.0 + 1.0 / (2.0 * PI * quadratic_tau(c) * n as f64).cosh()
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 30)
}

/// PV ∫₋₁¹ √(1 − t²) U_{n−1}(t) / (t − x) dt by singularity subtraction in
/// the angle variable, integrated adaptively on both sides of the pole.
pub fn pv_oracle(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let tx = x.acos();
    let fx = (nf * tx).sin();
    // (sin nθ − sin nθₓ)/(cos θ − cos θₓ) written with half-angle products so
    // that nothing cancels near θ = θₓ
    let g = |th: f64| {
        let (d, s) = (0.5 * (th - tx), 0.5 * (th + tx));
        let dirichlet = if d.abs() < 1e-300 { nf } else { (nf * d).sin() / d.sin() };
        -(nf * s).cos() * dirichlet / s.sin() * th.sin()
    };
    let smooth = simpson(&g, 0.0, tx, 1e-14) + simpson(&g, tx, PI, 1e-14);
    smooth + fx * ((1.0 - x) / (1.0 + x)).ln()
}

/// u_n(x) = sin[(nπ/K′) ∫₁^X ds/√((s² − 1)(1 − k²s²))], X = (C + x)/(C − 1),
/// with the s = 1 singularity removed by s = cosh v, and the s = 1/k one by
/// integrating from the other end.
pub fn quadratic_u(c: f64, n: usize, x: f64) -> f64 {
    let k = (c - 1.0) / (c + 1.0);
    let kp = k_series((1.0 - k * k).sqrt());
    let big_x = ((c + x) / (c - 1.0)).clamp(1.0, 1.0 / k);
    // ∫₁^X ds/√((s²−1)(1−k²s²)) with s = cosh v: ∫ dv/√(1 − k² cosh² v)
    let vmax = big_x.acosh();
    let vtop = (1.0 / k).acosh();
    let f = |v: f64| {
        let d = 1.0 - k * k * v.cosh().powi(2);
        if d <= 0.0 {
            0.0
        } else {
            1.0 / d.sqrt()
        }
    };
    let integral = if vmax < 0.5 * vtop {
        simpson(&f, 0.0, vmax, 1e-13)
    } else {
        // s = 1/k − ρ², which turns the tail into a smooth integral
        let top = 1.0 / k;
        let h = |r: f64| {
            let s = top - r * r;
            2.0 / (k * (1.0 + k * s) * (s * s - 1.0)).sqrt()
        };
        kp - simpson(&h, 0.0, (top - big_x).sqrt(), 1e-13)
    };
    (n as f64 * PI / kp * integral).sin()
}

/// Deterministic generator for the random cases of the test suites.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random Möbius map sending [−1, 1] onto itself: a hyperbolic
/// automorphism written out by hand, optionally composed with x ↦ −x.
pub fn random_gauge(rng: &mut ChaCha8Rng) -> Mobius {
    let s: f64 = rng.gen_range(-0.6..0.6);
    let sign = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
    Mobius::new(sign, sign * s, s, 1.0).unwrap()
}

/// Horner evaluation of an ascending coefficient list.
pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn horner_derivative(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &a)| acc * x + k as f64 * a)
}

/// (p(t) − p(x))/(t − x) summed term by term, with no subtraction of
/// nearly equal values.
pub fn divided_difference(c: &[f64], t: f64, x: f64) -> f64 {
    let (mut h, mut xp, mut sum) = (0.0, 1.0, 0.0);
    for &a in c.iter().skip(1) {
        h = t * h + xp;
        xp *= x;
        sum += a * h;
    }
    sum
}

/// R′(t)/(R(t) − R(x)) − 1/(t − x) for R = P/Q, written with first and
/// second divided differences so that nothing of size 1/(t − x) cancels.
///
/// With S = (R(t) − R(x))/(t − x) and T = (S − R′(t))/(t − x) the target is
/// −T/S, where
/// S = (Q(t)P[t,x] − P(t)Q[t,x]) / (Q(t)Q(x)) and
/// T = −(Q(t)²P[t,t,x] − P(t)Q(t)Q[t,t,x] − Q[t,x](P′(t)Q(t) − P(t)Q′(t))) / (Q(t)²Q(x)).
pub fn kernel_minus_pole(num: &[f64], den: &[f64], t: f64, x: f64) -> f64 {
    let (pt, qt, qx) = (horner(num, t), horner(den, t), horner(den, x));
    let (p1, q1) = (divided_difference(num, t, x), divided_difference(den, t, x));
    let (p2, q2) = (second_divided(num, t, x), second_divided(den, t, x));
    let (dp, dq) = (horner_derivative(num, t), horner_derivative(den, t));
    let s = (qt * p1 - pt * q1) / (qt * qx);
    let tt = -(qt * qt * p2 - pt * qt * q2 - q1 * (dp * qt - pt * dq)) / (qt * qt * qx);
    -tt / s
}

/// [t, t, x] divided difference of a polynomial.
fn second_divided(c: &[f64], t: f64, x: f64) -> f64 {
    // Σ_k c_k Σ_{i+j+l = k−2} t^i t^j x^l, accumulated by recurrence in k
    let (mut h1, mut h2, mut xp) = (0.0, 0.0, 1.0);
    let mut sum = 0.0;
    for &a in c.iter().skip(1) {
        h2 = t * h2 + h1;
        h1 = t * h1 + xp;
        xp *= x;
        sum += a * h2;
    }
    sum
}

/// Largest |a − s b| after choosing the least-squares scalar s.
pub fn aligned_sup_error(a: &[f64], b: &[f64]) -> f64 {
    let s = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / b.iter().map(|y| y * y).sum::<f64>();
    a.iter().zip(b).map(|(x, y)| (x - s * y).abs()).fold(0.0, f64::max)
}
