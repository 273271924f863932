//! Scalar special functions and Gauss–Legendre quadrature.
//!
//! Everything here is a pure function of its arguments. Functions that can
//! overflow for the shape parameters used downstream (Γ(l) with l ≈ 132,
//! (2K−1)!! beyond K ≈ 150) work in the log domain.

mod erfc;

pub use erfc::erfc;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Gaussian tail probability `Pr(N(0,1) > x)`.
///
/// Relative error stays below 1e-12 while the result is a normal double
/// (|x| up to about 37.5); past that the value is subnormal and only the
/// absolute error is meaningful.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("q_function: non-finite argument {x}")));
    }
    Ok(q(x))
}

/// Unchecked Q-function for inner loops; NaN in, NaN out.
#[inline]
pub(crate) fn q(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Natural log of Γ(x) for x > 0.
///
/// Shifts the argument above 15 with the recurrence and applies the
/// Stirling series through the x^-13 term.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return Err(domain(format!(
            "ln_gamma: argument must be positive and finite, got {x}"
        )));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    const SHIFT: f64 = 15.0;
    let mut z = x;
    let mut prod = 1.0;
    while z < SHIFT {
        prod *= z;
        z += 1.0;
    }
    let zi = 1.0 / z;
    let zi2 = zi * zi;
    #[rustfmt::skip]
    let series = zi * (1.0 / 12.0
        + zi2 * (-1.0 / 360.0
        + zi2 * (1.0 / 1260.0
        + zi2 * (-1.0 / 1680.0
        + zi2 * (1.0 / 1188.0
        + zi2 * (-691.0 / 360_360.0
        + zi2 * (1.0 / 156.0)))))));
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series - prod.ln()
}

/// ln(n!) for non-negative integers.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma_unchecked(n as f64 + 1.0)
    }
}

/// Regularized lower incomplete gamma function `P(s, x) = γ(s, x) / Γ(s)`.
///
/// Uses the power series for `x < s + 1` and the Legendre continued
/// fraction for the complement otherwise.
pub fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64> {
    if s.is_nan() || s <= 0.0 || s.is_infinite() {
        return Err(domain(format!(
            "regularized_lower_gamma: shape must be positive, got {s}"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!(
            "regularized_lower_gamma: x must be non-negative, got {x}"
        )));
    }
    Ok(lower_gamma_unchecked(s, x))
}

pub(crate) fn lower_gamma_unchecked(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let log_prefactor = -x + s * x.ln() - ln_gamma_unchecked(s);
    if x < s + 1.0 {
        (log_prefactor + lower_gamma_series(s, x).ln())
            .exp()
            .min(1.0)
    } else {
        let upper = (log_prefactor + upper_gamma_fraction(s, x).ln()).exp();
        (1.0 - upper).max(0.0)
    }
}

const GAMMA_EPS: f64 = 1e-17;
const GAMMA_MAX_ITER: usize = 100_000;

/// Σ x^n / (s (s+1) … (s+n)); converges for any x but is used for x < s + 1.
fn lower_gamma_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of the continued fraction for Γ(s, x) e^x x^-s.
fn upper_gamma_fraction(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    h
}

/// `ln((2K−1)!!) = Σ_{i=1..K} ln(2i−1)`, compensated summation.
///
/// `K = 0` is the empty product and returns 0.
pub fn log_double_factorial_odd(k: i64) -> Result<f64> {
    if k < 0 {
        return Err(domain(format!(
            "log_double_factorial_odd: K must be non-negative, got {k}"
        )));
    }
    Ok(log_double_factorial_odd_unchecked(k as u64))
}

pub(crate) fn log_double_factorial_odd_unchecked(k: u64) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for i in 1..=k {
        let term = ((2 * i - 1) as f64).ln();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Nodes and weights of a quadrature rule on the reference interval [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Strictly increasing abscissae inside (−1, 1).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_a^b f via the affine map from [−1, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

pub const MIN_GAUSS_LEGENDRE_ORDER: usize = 2;
pub const MAX_GAUSS_LEGENDRE_ORDER: usize = 512;

/// Gauss–Legendre rule with `order` points, exact for polynomials of
/// degree up to `2·order − 1`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if !(MIN_GAUSS_LEGENDRE_ORDER..=MAX_GAUSS_LEGENDRE_ORDER).contains(&order) {
        return Err(domain(format!(
            "gauss_legendre: order must be in {MIN_GAUSS_LEGENDRE_ORDER}..={MAX_GAUSS_LEGENDRE_ORDER}, got {order}"
        )));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots are symmetric; solve for the positive half with Newton's method.
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// (P_n(x), P_n'(x)) via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
