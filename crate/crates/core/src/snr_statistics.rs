//! Distribution models for `Y = Σ|hᵢ|` and for the optimal received SNR
//! `γ = M γ̄ Y²`.
//!
//! Two fits with matched mean and variance are provided: a Gaussian
//! truncated at zero (CLT) and a Gamma law. Small-argument expansions of
//! the exact CDF of `Y` capture the lower tail that governs diversity.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::specfun::{
    self, ln_factorial, ln_gamma_unchecked, log_double_factorial_odd_unchecked, q,
};

/// `E|hᵢ| = √π/2` for a unit-power Rayleigh gain.
pub const RAYLEIGH_MEAN: f64 = 0.886_226_925_452_758;
/// `var|hᵢ| = (4 − π)/4`.
pub const RAYLEIGH_VARIANCE: f64 = (4.0 - PI) / 4.0;

/// Which fitted law of `Y` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionFit {
    Clt,
    Gamma,
}

impl DistributionFit {
    pub fn name(self) -> &'static str {
        match self {
            DistributionFit::Clt => "clt",
            DistributionFit::Gamma => "gamma",
        }
    }
}

/// Gaussian fit of `Y` truncated to `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltModel {
    mu_y: f64,
    sigma_y: f64,
    trunc_const: f64,
    k_elements: usize,
}

impl CltModel {
    pub fn mu_y(&self) -> f64 {
        self.mu_y
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn variance(&self) -> f64 {
        self.sigma_y * self.sigma_y
    }

    /// Truncation constant `C = 1 / Q(−μ_Y/σ_Y)`.
    pub fn trunc_const(&self) -> f64 {
        self.trunc_const
    }

    pub fn k_elements(&self) -> usize {
        self.k_elements
    }
}

pub fn clt_model(k_elements: usize) -> Result<CltModel> {
    check_k(k_elements)?;
    let k = k_elements as f64;
    let mu_y = k * RAYLEIGH_MEAN;
    let sigma_y = (k * RAYLEIGH_VARIANCE).sqrt();
    Ok(CltModel {
        mu_y,
        sigma_y,
        trunc_const: 1.0 / q(-mu_y / sigma_y),
        k_elements,
    })
}

pub fn clt_cdf_y(y: f64, model: &CltModel) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    (1.0 - model.trunc_const * q((y - model.mu_y) / model.sigma_y)).clamp(0.0, 1.0)
}

pub fn clt_pdf_y(y: f64, model: &CltModel) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    let z = (y - model.mu_y) / model.sigma_y;
    model.trunc_const * (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * model.sigma_y)
}

/// Gamma fit of `Y` with shape `l = Kπ/(4−π)` and scale `θ = (4−π)/(2√π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaModel {
    shape: f64,
    scale: f64,
    k_elements: usize,
}

impl GammaModel {
    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn k_elements(&self) -> usize {
        self.k_elements
    }
}

pub fn gamma_model(k_elements: usize) -> Result<GammaModel> {
    check_k(k_elements)?;
    Ok(GammaModel {
        shape: k_elements as f64 * PI / (4.0 - PI),
        scale: (4.0 - PI) / (2.0 * PI.sqrt()),
        k_elements,
    })
}

pub fn gamma_cdf_y(y: f64, model: &GammaModel) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    specfun::lower_gamma_unchecked(model.shape, y / model.scale)
}

/// Gamma density, evaluated in the log domain (Γ(l) overflows for l ≳ 171).
pub fn gamma_pdf_y(y: f64, model: &GammaModel) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    let (l, theta) = (model.shape, model.scale);
    if y == 0.0 {
        return match l.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Equal) => 1.0 / theta,
            _ => f64::INFINITY,
        };
    }
    ((l - 1.0) * y.ln() - y / theta - l * theta.ln() - ln_gamma_unchecked(l)).exp()
}

/// Both fits for one RIS size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YDistributionModel {
    pub clt: CltModel,
    pub gamma: GammaModel,
}

impl YDistributionModel {
    pub fn new(k_elements: usize) -> Result<Self> {
        Ok(Self {
            clt: clt_model(k_elements)?,
            gamma: gamma_model(k_elements)?,
        })
    }

    pub fn cdf(&self, y: f64, fit: DistributionFit) -> f64 {
        match fit {
            DistributionFit::Clt => clt_cdf_y(y, &self.clt),
            DistributionFit::Gamma => gamma_cdf_y(y, &self.gamma),
        }
    }

    pub fn pdf(&self, y: f64, fit: DistributionFit) -> f64 {
        match fit {
            DistributionFit::Clt => clt_pdf_y(y, &self.clt),
            DistributionFit::Gamma => gamma_pdf_y(y, &self.gamma),
        }
    }
}

/// CDF of the optimal SNR, `F_Y(√(z / (M γ̄)))` under the chosen fit.
pub fn snr_cdf(
    z: f64,
    k_elements: usize,
    m_antennas: usize,
    gamma_bar: f64,
    fit: DistributionFit,
) -> Result<f64> {
    check_m(m_antennas)?;
    check_positive_gamma_bar(gamma_bar)?;
    if z.is_nan() {
        return Err(domain("snr_cdf: argument is NaN"));
    }
    let model = YDistributionModel::new(k_elements)?;
    if z < 0.0 {
        return Ok(0.0);
    }
    Ok(model.cdf((z / (m_antennas as f64 * gamma_bar)).sqrt(), fit))
}

/// `x = y² / (2dK)` with `2dK = ((2K−1)!!)^{1/K}`.
fn small_argument_variable(y: f64, k_elements: usize) -> f64 {
    let k = k_elements as f64;
    y * y * (-log_double_factorial_odd_unchecked(k_elements as u64) / k).exp()
}

/// Small-argument approximation of the CDF of `Y`:
/// `1 − e^{−x} Σ_{i<K} xⁱ/i!` with `x = y²/(2dK)`.
///
/// The finite sum is the regularized lower incomplete gamma `P(K, x)`,
/// which is how it is evaluated here so the result keeps full relative
/// precision as `y → 0`.
pub fn small_argument_cdf_y(y: f64, k_elements: usize) -> Result<f64> {
    check_k(k_elements)?;
    check_y(y)?;
    let x = small_argument_variable(y, k_elements);
    Ok(specfun::lower_gamma_unchecked(k_elements as f64, x).clamp(0.0, 1.0))
}

/// Leading term `y^{2K} / ((2K−1)!! K!)` of the small-argument expansion.
pub fn leading_order_cdf_y(y: f64, k_elements: usize) -> Result<f64> {
    check_k(k_elements)?;
    check_y(y)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let k = k_elements as u64;
    Ok((2.0 * k as f64 * y.ln() - log_double_factorial_odd_unchecked(k) - ln_factorial(k)).exp())
}

/// Exact mean of the optimal SNR, `M γ̄ (K²π + K(4−π)) / 4`.
pub fn mean_snr(m_antennas: usize, k_elements: usize, gamma_bar: f64) -> Result<f64> {
    check_m(m_antennas)?;
    check_k(k_elements)?;
    if !(gamma_bar >= 0.0 && gamma_bar.is_finite()) {
        return Err(domain(format!(
            "average SNR must be finite and non-negative, got {gamma_bar}"
        )));
    }
    let k = k_elements as f64;
    Ok(m_antennas as f64 * gamma_bar * (k * k * PI + k * (4.0 - PI)) / 4.0)
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(domain("number of RIS elements K must be at least 1"))
    } else {
        Ok(())
    }
}

pub(crate) fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(domain("number of BS antennas M must be at least 1"))
    } else {
        Ok(())
    }
}

pub(crate) fn check_positive_gamma_bar(gamma_bar: f64) -> Result<()> {
    if gamma_bar > 0.0 && gamma_bar.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "average SNR must be positive and finite, got {gamma_bar}"
        )))
    }
}

fn check_y(y: f64) -> Result<()> {
    if y >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("y must be non-negative, got {y}")))
    }
}

#[cfg(test)]
// Reference values keep every digit of the high-precision source.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::specfun::gauss_legendre;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Composite Gauss–Legendre over `pieces` equal panels.
    fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
        let rule = gauss_legendre(32).unwrap();
        let h = (b - a) / pieces as f64;
        (0..pieces)
            .map(|i| rule.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &f))
            .sum()
    }

    #[test]
    fn rayleigh_constants() {
        assert!(rel(RAYLEIGH_MEAN, PI.sqrt() / 2.0) < 1e-15);
    }

    #[test]
    fn clt_model_k16() {
        let m = clt_model(16).unwrap();
        assert!(rel(m.mu_y(), 8.0 * PI.sqrt()) < 1e-13);
        assert!((m.mu_y() - 14.17963).abs() < 1e-5);
        assert!(rel(m.variance(), 4.0 * (4.0 - PI)) < 1e-13);
        assert!((m.variance() - 3.43363).abs() < 1e-5);
        assert!(m.trunc_const() - 1.0 < 1e-13);
        assert!(m.trunc_const() >= 1.0);
    }

    #[test]
    fn clt_model_k1() {
        let m = clt_model(1).unwrap();
        assert!(rel(m.mu_y(), PI.sqrt() / 2.0) < 1e-13);
        assert!(rel(m.variance(), (4.0 - PI) / 4.0) < 1e-13);
        assert!((m.mu_y() / m.sigma_y() - 1.913).abs() < 1e-3);
        assert!((m.trunc_const() - 1.029).abs() < 1e-3);
        assert!(clt_model(0).is_err());
    }

    #[test]
    fn clt_cdf_pdf_examples() {
        let m = clt_model(4).unwrap();
        assert_eq!(clt_cdf_y(-1.0, &m), 0.0);
        assert!((clt_cdf_y(m.mu_y(), &m) - (1.0 - m.trunc_const() / 2.0)).abs() < 1e-15);
        assert_eq!(clt_cdf_y(1e6, &m), 1.0);
        assert_eq!(clt_pdf_y(-0.5, &m), 0.0);
        let peak = m.trunc_const() / (2.0 * PI * m.variance()).sqrt();
        assert!(rel(clt_pdf_y(m.mu_y(), &m), peak) < 1e-14);
        // Truncated at 0, so the CDF starts at 0 exactly.
        assert!(clt_cdf_y(0.0, &m).abs() < 1e-15);
    }

    #[test]
    fn clt_pdf_integrates_to_one() {
        for k in [1, 4, 16, 36] {
            let m = clt_model(k).unwrap();
            let total = integrate(|y| clt_pdf_y(y, &m), 0.0, m.mu_y() + 12.0 * m.sigma_y(), 64);
            assert!((total - 1.0).abs() < 1e-10, "K={k}: {total}");
        }
    }

    #[test]
    fn gamma_model_examples() {
        let g = gamma_model(16).unwrap();
        assert!((g.shape() - 58.5567).abs() < 1e-4);
        assert!((g.scale() - 0.242153).abs() < 1e-6);
        assert!(rel(g.mean(), 16.0 * PI.sqrt() / 2.0) < 1e-14);
        assert!((gamma_model(36).unwrap().shape() - 131.753).abs() < 1e-3);
    }

    #[test]
    fn moment_matching() {
        for k in [1, 4, 16, 36, 100] {
            let c = clt_model(k).unwrap();
            let g = gamma_model(k).unwrap();
            assert!(rel(g.mean(), c.mu_y()) < 1e-12);
            assert!(rel(g.variance(), c.variance()) < 1e-12);
        }
    }

    #[test]
    fn gamma_cdf_pdf_examples() {
        let g = gamma_model(16).unwrap();
        assert_eq!(gamma_cdf_y(0.0, &g), 0.0);
        assert_eq!(gamma_cdf_y(-3.0, &g), 0.0);
        assert_eq!(gamma_cdf_y(1e4, &g), 1.0);
        assert_eq!(gamma_pdf_y(0.0, &g), 0.0);
        assert_eq!(gamma_pdf_y(-1.0, &g), 0.0);
        let mode = (g.shape() - 1.0) * g.scale();
        let f = |y| gamma_pdf_y(y, &g);
        assert!(f(mode) > f(mode - 1e-3) && f(mode) > f(mode + 1e-3));
    }

    #[test]
    fn gamma_pdf_integrates_to_one() {
        for k in [1, 16, 36] {
            let g = gamma_model(k).unwrap();
            let upper = g.mean() + 40.0 * g.shape().sqrt() * g.scale();
            let total = integrate(|y| gamma_pdf_y(y, &g), 0.0, upper, 64);
            assert!((total - 1.0).abs() < 1e-10, "K={k}: {total}");
        }
    }

    #[test]
    fn cdfs_are_monotone_and_bounded() {
        for k in [1, 4, 16, 36] {
            let model = YDistributionModel::new(k).unwrap();
            for fit in [DistributionFit::Clt, DistributionFit::Gamma] {
                let mut prev = 0.0;
                for i in 0..4000 {
                    let y = i as f64 * 0.02;
                    let v = model.cdf(y, fit);
                    assert!((0.0..=1.0).contains(&v));
                    assert!(v >= prev, "K={k} {fit:?} y={y}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn snr_cdf_examples() {
        for fit in [DistributionFit::Clt, DistributionFit::Gamma] {
            assert_eq!(snr_cdf(0.0, 16, 16, 1.0, fit).unwrap(), 0.0);
            assert_eq!(snr_cdf(-5.0, 16, 16, 1.0, fit).unwrap(), 0.0);
            assert!(snr_cdf(1.0, 16, 16, 0.0, fit).is_err());
            assert!(snr_cdf(1.0, 16, 16, -1.0, fit).is_err());
        }
        let c = clt_model(16).unwrap();
        let z = 16.0 * 2.0 * c.mu_y().powi(2);
        let got = snr_cdf(z, 16, 16, 2.0, DistributionFit::Clt).unwrap();
        assert!((got - (1.0 - c.trunc_const() / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn snr_cdf_composition_identity() {
        let model = YDistributionModel::new(9).unwrap();
        for fit in [DistributionFit::Clt, DistributionFit::Gamma] {
            for z in [0.01, 0.3, 1.0, 7.5, 40.0, 300.0] {
                let (m, gb) = (4usize, 0.8);
                let direct = model.cdf((z / (m as f64 * gb)).sqrt(), fit);
                assert!((snr_cdf(z, 9, m, gb, fit).unwrap() - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn small_argument_examples() {
        assert_eq!(small_argument_cdf_y(0.0, 3).unwrap(), 0.0);
        for y in [0.01, 0.3, 1.0, 2.5] {
            let got = small_argument_cdf_y(y, 1).unwrap();
            let want = -(-y * y).exp_m1();
            assert!(rel(got, want) < 1e-13, "y={y}");
        }
        // K = 2: d = √3/4
        let d = (log_double_factorial_odd_unchecked(2) / 2.0).exp() / 4.0;
        assert!((d - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((d - 0.43301).abs() < 1e-5);
        assert!(small_argument_cdf_y(-0.1, 2).is_err());
    }

    #[test]
    fn leading_order_examples() {
        assert_eq!(leading_order_cdf_y(0.0, 2).unwrap(), 0.0);
        assert!(rel(leading_order_cdf_y(0.1, 1).unwrap(), 0.01) < 1e-13);
        assert!(rel(leading_order_cdf_y(0.1, 2).unwrap(), 1e-4 / 6.0) < 1e-13);
    }

    #[test]
    fn small_argument_and_leading_order_agree_near_zero() {
        for k in 1..=6 {
            for y in [1e-4, 1e-3, 1e-2] {
                let r = small_argument_cdf_y(y, k).unwrap() / leading_order_cdf_y(y, k).unwrap();
                assert!((r - 1.0).abs() < 0.01, "K={k}, y={y}: ratio {r}");
            }
        }
    }

    #[test]
    fn mean_snr_examples() {
        assert!(rel(mean_snr(1, 1, 1.0).unwrap(), 1.0) < 1e-15);
        let m = mean_snr(16, 16, 1.0).unwrap();
        assert!(rel(m, 960.0 * PI + 256.0) < 1e-14);
        assert!((m - 3271.93).abs() < 0.01);
        assert_eq!(mean_snr(16, 16, 0.0).unwrap(), 0.0);
    }
}
