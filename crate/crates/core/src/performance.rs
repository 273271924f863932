//! Outage probability, high-SNR asymptotics, ergodic-rate upper bound and
//! average symbol error probability for the optimally beamformed link.
//!
//! The SEP integral is written over the Craig angle on `[0, π/2]`. Its
//! prefactor contains `exp(−μ_Y²/(2σ_Y²))`, which underflows quickly as K
//! grows, while the integrand carries a compensating `exp(c²/A)`; both are
//! combined in the log domain before exponentiating.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Result};
use crate::snr_statistics::{
    check_k, check_m, check_positive_gamma_bar, clt_model, leading_order_cdf_y, mean_snr, snr_cdf,
    DistributionFit,
};
use crate::specfun::{gauss_legendre, log_double_factorial_odd_unchecked, q, QuadratureRule};

/// `Pr(γ ≤ γ_th)` under the chosen fit.
pub fn outage_probability(
    gamma_th: f64,
    k_elements: usize,
    m_antennas: usize,
    gamma_bar: f64,
    fit: DistributionFit,
) -> Result<f64> {
    check_threshold(gamma_th)?;
    snr_cdf(gamma_th, k_elements, m_antennas, gamma_bar, fit)
}

/// High-SNR outage law `(γ_th/γ̄)^K / (M^K (2K−1)!!)`, i.e. `(O_c γ̄)^{−K}`.
///
/// Not clamped: outside the high-SNR region the value can exceed 1.
/// This form is larger than the leading-order tail of the exact CDF
/// ([`leading_order_outage`]) by a factor of exactly `K!`.
pub fn asymptotic_outage(
    gamma_th: f64,
    gamma_bar: f64,
    m_antennas: usize,
    k_elements: usize,
) -> Result<f64> {
    check_threshold(gamma_th)?;
    check_positive_gamma_bar(gamma_bar)?;
    check_m(m_antennas)?;
    check_k(k_elements)?;
    let k = k_elements as f64;
    Ok((k * (gamma_th / gamma_bar).ln()
        - k * (m_antennas as f64).ln()
        - log_double_factorial_odd_unchecked(k_elements as u64))
    .exp())
}

/// Leading-order small-argument CDF of `Y` evaluated at `√(γ_th/(M γ̄))`:
/// `(γ_th/(M γ̄))^K / ((2K−1)!! K!)`. Asymptotically exact as γ̄ → ∞.
pub fn leading_order_outage(
    gamma_th: f64,
    gamma_bar: f64,
    m_antennas: usize,
    k_elements: usize,
) -> Result<f64> {
    check_threshold(gamma_th)?;
    check_positive_gamma_bar(gamma_bar)?;
    check_m(m_antennas)?;
    leading_order_cdf_y(
        (gamma_th / (m_antennas as f64 * gamma_bar)).sqrt(),
        k_elements,
    )
}

/// Diversity order and coding gain of the high-SNR outage law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityCodingGain {
    pub diversity: f64,
    pub coding_gain: f64,
}

/// `G_d = K`, `O_c = (M/γ_th)·((2K−1)!!)^{1/K}`.
pub fn diversity_and_coding_gain(
    m_antennas: usize,
    k_elements: usize,
    gamma_th: f64,
) -> Result<DiversityCodingGain> {
    check_m(m_antennas)?;
    check_k(k_elements)?;
    check_threshold(gamma_th)?;
    let k = k_elements as f64;
    Ok(DiversityCodingGain {
        diversity: k,
        coding_gain: m_antennas as f64 / gamma_th
            * (log_double_factorial_odd_unchecked(k_elements as u64) / k).exp(),
    })
}

/// Jensen bound `log₂(1 + E[γ])` in bits per channel use.
pub fn rate_upper_bound(m_antennas: usize, k_elements: usize, gamma_bar: f64) -> Result<f64> {
    Ok(mean_snr(m_antennas, k_elements, gamma_bar)?.ln_1p() / LN_2)
}

/// Modulations whose conditional SEP is `α Q(√(β γ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationParams {
    alpha: f64,
    beta: f64,
    name: String,
}

impl ModulationParams {
    pub fn new(alpha: f64, beta: f64, name: impl Into<String>) -> Result<Self> {
        for (label, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v <= 4.0) {
                return Err(domain(format!(
                    "modulation {label} must lie in (0, 4], got {v}"
                )));
            }
        }
        Ok(Self {
            alpha,
            beta,
            name: name.into(),
        })
    }

    pub fn bpsk() -> Self {
        Self {
            alpha: 1.0,
            beta: 2.0,
            name: "bpsk".into(),
        }
    }

    /// Gray-coded QPSK symbol error, union-bound form `2Q(√γ)`.
    pub fn qpsk() -> Self {
        Self {
            alpha: 2.0,
            beta: 1.0,
            name: "qpsk".into(),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `α Q(√(β γ))`.
    pub fn conditional_sep(&self, snr: f64) -> f64 {
        self.alpha * q((self.beta * snr).sqrt())
    }
}

/// Constants of the SEP integral: `Υ` (kept as a logarithm), `a = Mβγ̄`,
/// `b = 1/(2σ_Y²)`, `c = μ_Y/(2σ_Y²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepConstants {
    pub log_upsilon: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `ln α + ln C − ½ ln 2π − ln σ_Y`, i.e. `ln Υ + c²/b`.
    log_upsilon_scaled: f64,
}

impl SepConstants {
    /// `Υ = α C exp(−μ_Y²/(2σ_Y²)) / (√(2π) σ_Y)`; underflows to 0 for large K.
    pub fn upsilon(&self) -> f64 {
        self.log_upsilon.exp()
    }

    /// `ln` of the integrand of the single-integral form, at `t = a/(2 sin²θ)`,
    /// including the prefactor `Υ`.
    fn log_integrand(&self, t: f64) -> f64 {
        let big_a = t + self.b;
        // c²/A − c²/b without cancellation
        let exponent = -self.c * self.c * t / (big_a * self.b);
        let qf = q(-std::f64::consts::SQRT_2 * self.c / big_a.sqrt());
        self.log_upsilon_scaled + exponent - 0.5 * big_a.ln() + qf.ln()
    }
}

pub fn sep_constants(
    modulation: &ModulationParams,
    m_antennas: usize,
    k_elements: usize,
    gamma_bar: f64,
) -> Result<SepConstants> {
    check_m(m_antennas)?;
    if !(gamma_bar >= 0.0 && gamma_bar.is_finite()) {
        return Err(domain(format!(
            "average SNR must be finite and non-negative, got {gamma_bar}"
        )));
    }
    let clt = clt_model(k_elements)?;
    let var = clt.variance();
    let b = 1.0 / (2.0 * var);
    let c = clt.mu_y() / (2.0 * var);
    let log_upsilon_scaled = modulation.alpha().ln() + clt.trunc_const().ln()
        - 0.5 * (2.0 * PI).ln()
        - clt.sigma_y().ln();
    Ok(SepConstants {
        log_upsilon: log_upsilon_scaled - clt.mu_y() * clt.mu_y() / (2.0 * var),
        a: m_antennas as f64 * modulation.beta() * gamma_bar,
        b,
        c,
        log_upsilon_scaled,
    })
}

/// Default Gauss–Legendre order for the SEP integral.
pub const DEFAULT_SEP_ORDER: usize = 64;

/// Average SEP with the CLT density for `Y`, via the single integral over
/// the Craig angle evaluated with `rule` on `[0, π/2]`. Clamped to `[0, 1]`.
pub fn sep_exact(
    modulation: &ModulationParams,
    m_antennas: usize,
    k_elements: usize,
    gamma_bar: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_positive_gamma_bar(gamma_bar)?;
    let consts = sep_constants(modulation, m_antennas, k_elements, gamma_bar)?;
    let integral = rule.integrate(0.0, PI / 2.0, |theta| {
        let s = theta.sin();
        consts.log_integrand(consts.a / (2.0 * s * s)).exp()
    });
    Ok((integral / PI.sqrt()).clamp(0.0, 1.0))
}

/// Result of [`sep_exact_converged`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergedSep {
    pub value: f64,
    pub order: usize,
    pub converged: bool,
}

/// [`sep_exact`] starting at order 64 and doubling the order until two
/// successive values agree to `rel_tol` (or the maximum order is reached).
pub fn sep_exact_converged(
    modulation: &ModulationParams,
    m_antennas: usize,
    k_elements: usize,
    gamma_bar: f64,
    rel_tol: f64,
) -> Result<ConvergedSep> {
    let mut order = DEFAULT_SEP_ORDER;
    let mut prev = sep_exact(
        modulation,
        m_antennas,
        k_elements,
        gamma_bar,
        &gauss_legendre(order)?,
    )?;
    while order * 2 <= crate::specfun::MAX_GAUSS_LEGENDRE_ORDER {
        order *= 2;
        let next = sep_exact(
            modulation,
            m_antennas,
            k_elements,
            gamma_bar,
            &gauss_legendre(order)?,
        )?;
        let diff = (next - prev).abs();
        prev = next;
        if diff <= rel_tol * next.abs() {
            return Ok(ConvergedSep {
                value: next,
                order,
                converged: true,
            });
        }
    }
    Ok(ConvergedSep {
        value: prev,
        order,
        converged: false,
    })
}

/// Closed-form bound from the integrand at θ = π/2 (where it peaks):
/// `Υ√π/√(2a+4b) · exp(c²/(a/2+b)) · Q(−√2 c/√(a/2+b))`.
pub fn sep_upper_bound(
    modulation: &ModulationParams,
    m_antennas: usize,
    k_elements: usize,
    gamma_bar: f64,
) -> Result<f64> {
    if !(gamma_bar >= 0.0 && gamma_bar.is_finite()) {
        return Err(domain(format!(
            "average SNR must be finite and non-negative, got {gamma_bar}"
        )));
    }
    let consts = sep_constants(modulation, m_antennas, k_elements, gamma_bar)?;
    // Υ√π/√(4A) = (π/2)·(Υ/√π)/√A with A = a/2 + b.
    Ok(PI.sqrt() / 2.0 * consts.log_integrand(consts.a / 2.0).exp())
}

/// Average SNR in dB at which a decreasing metric reaches `level`.
///
/// Bisection on `[lo_db, hi_db]` in log-metric space; `None` if the level
/// is not bracketed.
pub fn gamma_bar_db_at_level<F>(mut metric: F, level: f64, lo_db: f64, hi_db: f64) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let target = level.ln();
    let mut eval = |db: f64| metric(db_to_linear(db)).ln() - target;
    let (mut lo, mut hi) = (lo_db, hi_db);
    let (f_lo, f_hi) = (eval(lo), eval(hi));
    if !(f_lo >= 0.0 && f_hi <= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn check_threshold(gamma_th: f64) -> Result<()> {
    if gamma_th > 0.0 && gamma_th.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "outage threshold must be positive and finite, got {gamma_th}"
        )))
    }
}

#[cfg(test)]
// Reference values keep every digit of the high-precision source.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::specfun::ln_factorial;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn outage_limits() {
        for fit in [DistributionFit::Clt, DistributionFit::Gamma] {
            assert!(outage_probability(1e-12, 16, 16, 1.0, fit).unwrap() < 1e-100);
            assert_eq!(outage_probability(1e12, 16, 16, 1.0, fit).unwrap(), 1.0);
            assert!(outage_probability(0.0, 16, 16, 1.0, fit).is_err());
        }
    }

    #[test]
    fn asymptotic_outage_examples() {
        assert!(rel(asymptotic_outage(0.01, 1.0, 1, 1).unwrap(), 0.01) < 1e-14);
        assert!(rel(asymptotic_outage(0.1, 1.0, 2, 2).unwrap(), 0.01 / 12.0) < 1e-14);
        assert!((asymptotic_outage(0.1, 1.0, 2, 2).unwrap() - 8.333e-4).abs() < 1e-7);
        // Not clamped
        assert!(asymptotic_outage(100.0, 1.0, 1, 3).unwrap() > 1.0);
    }

    #[test]
    fn asymptotic_log_log_slope_is_minus_k() {
        for k in [1, 4, 16, 36] {
            let (g1, g2) = (1e3, 1e5);
            let p1 = asymptotic_outage(10.0, g1, 16, k).unwrap().ln();
            let p2 = asymptotic_outage(10.0, g2, 16, k).unwrap().ln();
            let slope = (p2 - p1) / (g2 / g1).ln();
            assert!((slope + k as f64).abs() < 1e-9, "K={k}: {slope}");
        }
    }

    #[test]
    fn asymptotic_is_k_factorial_times_leading_order() {
        for k in [1, 2, 3, 8, 36] {
            let asy = asymptotic_outage(10.0, 1e4, 4, k).unwrap();
            let lead = leading_order_outage(10.0, 1e4, 4, k).unwrap();
            assert!(rel(asy / lead, ln_factorial(k as u64).exp()) < 1e-10);
        }
    }

    #[test]
    fn coding_gain_examples() {
        let g = diversity_and_coding_gain(4, 1, 2.0).unwrap();
        assert_eq!(g.diversity, 1.0);
        assert!(rel(g.coding_gain, 2.0) < 1e-15);
        let g = diversity_and_coding_gain(1, 2, 1.0).unwrap();
        assert!(rel(g.coding_gain, 3f64.sqrt()) < 1e-14);
        let g16 = diversity_and_coding_gain(16, 16, 10.0).unwrap();
        let g32 = diversity_and_coding_gain(32, 16, 10.0).unwrap();
        assert_eq!(g16.diversity, g32.diversity);
        assert!(rel(g32.coding_gain, 2.0 * g16.coding_gain) < 1e-14);
    }

    #[test]
    fn coding_gain_reproduces_asymptotic_outage() {
        for (m, k, gth, gb) in [(16, 16, 10.0, 1e3), (4, 3, 2.0, 50.0), (36, 16, 10.0, 7.0)] {
            let g = diversity_and_coding_gain(m, k, gth).unwrap();
            let via_gain = (g.coding_gain * gb).powf(-g.diversity);
            assert!(rel(asymptotic_outage(gth, gb, m, k).unwrap(), via_gain) < 1e-10);
        }
    }

    #[test]
    fn rate_bound_examples() {
        assert_eq!(rate_upper_bound(16, 16, 0.0).unwrap(), 0.0);
        let r = rate_upper_bound(16, 16, 1.0).unwrap();
        assert!((r - 11.676).abs() < 1e-3, "{r}");
    }

    #[test]
    fn modulation_validation() {
        assert!(ModulationParams::new(1.0, 2.0, "bpsk").is_ok());
        assert!(ModulationParams::new(0.0, 2.0, "x").is_err());
        assert!(ModulationParams::new(1.0, 4.5, "x").is_err());
        assert_eq!(ModulationParams::bpsk().conditional_sep(0.0), 0.5);
    }

    #[test]
    fn sep_constants_examples() {
        let c = sep_constants(&ModulationParams::bpsk(), 1, 16, 1.0).unwrap();
        assert_eq!(c.a, 2.0);
        let c = sep_constants(&ModulationParams::bpsk(), 16, 16, 1.0).unwrap();
        assert!((c.b - 0.145619).abs() < 1e-6);
        assert!((c.c - 2.064817).abs() < 1e-6);
        let clt = clt_model(16).unwrap();
        assert!(rel(c.b, 1.0 / (2.0 * clt.variance())) < 1e-13);
        assert!(rel(c.c, clt.mu_y() / (2.0 * clt.variance())) < 1e-13);
        assert!(rel(c.a, 16.0 * 2.0) < 1e-13);
    }

    #[test]
    fn sep_constants_log_upsilon_k16() {
        // ln α + ln C − μ²/(2σ²) − ½ln 2π − ln σ at K = 16, BPSK; 30-digit reference.
        let c = sep_constants(&ModulationParams::bpsk(), 16, 16, 1.0).unwrap();
        let want = -30.814_086_379_647_271;
        assert!(rel(c.log_upsilon, want) < 1e-13, "{}", c.log_upsilon);
    }

    #[test]
    fn sep_zero_snr_limit_is_half_alpha() {
        let rule = gauss_legendre(64).unwrap();
        let bpsk = ModulationParams::bpsk();
        let qpsk = ModulationParams::qpsk();
        for k in [1, 16, 36] {
            let ub = sep_upper_bound(&bpsk, 16, k, 0.0).unwrap();
            assert!(rel(ub, 0.5) < 1e-12, "K={k}: {ub}");
            let ex = sep_exact(&bpsk, 16, k, 1e-14, &rule).unwrap();
            assert!(rel(ex, 0.5) < 1e-6, "K={k}: {ex}");
            let ex = sep_exact(&qpsk, 16, k, 1e-14, &rule).unwrap();
            assert!(rel(ex, 1.0) < 1e-6, "K={k}: {ex}");
        }
        assert!(sep_exact(&bpsk, 16, 16, 0.0, &rule).is_err());
    }

    #[test]
    fn sep_exact_decreasing_and_below_bound() {
        let rule = gauss_legendre(64).unwrap();
        let bpsk = ModulationParams::bpsk();
        let mut prev = 1.0;
        for i in 0..20 {
            let db = -45.0 + 2.0 * i as f64;
            let gb = db_to_linear(db);
            let ex = sep_exact(&bpsk, 16, 16, gb, &rule).unwrap();
            let ub = sep_upper_bound(&bpsk, 16, 16, gb).unwrap();
            assert!(ex < prev, "db={db}");
            assert!(ub >= ex, "db={db}: {ub} < {ex}");
            prev = ex;
        }
        assert!(prev < 1e-12, "{prev}");
    }

    #[test]
    fn sep_quadrature_refinement() {
        let bpsk = ModulationParams::bpsk();
        let (r64, r128) = (gauss_legendre(64).unwrap(), gauss_legendre(128).unwrap());
        for db in [-40.0, -30.0, -25.0, -20.0] {
            let gb = db_to_linear(db);
            let a = sep_exact(&bpsk, 16, 16, gb, &r64).unwrap();
            let b = sep_exact(&bpsk, 16, 16, gb, &r128).unwrap();
            assert!(rel(a, b) < 1e-10, "db={db}: {a} vs {b}");
        }
        let conv = sep_exact_converged(&bpsk, 16, 16, db_to_linear(-30.0), 1e-10).unwrap();
        assert!(conv.converged);
        assert_eq!(conv.order, 128);
    }

    #[test]
    fn level_crossing() {
        let db = gamma_bar_db_at_level(|g| 1.0 / g, 1e-3, -10.0, 50.0).unwrap();
        assert!((db - 30.0).abs() < 1e-8);
        assert!(gamma_bar_db_at_level(|g| 1.0 / g, 1e-9, -10.0, 50.0).is_none());
        assert!((linear_to_db(db_to_linear(13.0)) - 13.0).abs() < 1e-12);
    }
}
