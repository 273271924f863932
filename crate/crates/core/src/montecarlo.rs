//! Monte-Carlo oracle for the distribution of `Y = Σ|hᵢ|` and the
//! outage, rate and SEP of the optimally beamformed link.
//!
//! Trial `t` draws its fading from its own ChaCha8 stream, keyed by the
//! seed with stream number `t`, so every sample is a pure function of
//! `(seed, t)`. Trials are processed in fixed-size chunks; per-chunk
//! accumulators are merged in chunk order, which makes every estimate
//! bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beamforming::{brute_force_phase_search, closed_form_snr, optimize};
use crate::channel::{
    cascaded_channel, exact_sqrt, linear_array_response, sample_fading,
    sample_fading_magnitude_sum, LinkGeometry, LosChannel,
};
use crate::error::{domain, Error, Result};
use crate::exec::Execution;
use crate::performance::ModulationParams;

/// Trials per work item.
pub const CHUNK_TRIALS: u64 = 4096;

/// Relative tolerance of the pipeline self-check.
pub const PIPELINE_TOLERANCE: f64 = 1e-10;

/// One Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub k_elements: usize,
    pub m_antennas: usize,
    /// Linear average transmit SNR.
    pub gamma_bar: f64,
    pub trials: u64,
    pub seed: u64,
    pub scenario_label: String,
    /// Array geometry used when the full channel is built.
    pub link: LinkGeometry,
}

impl SimulationConfig {
    /// Uses the symmetric π/4, half-wavelength geometry for the arrays.
    pub fn new(
        k_elements: usize,
        m_antennas: usize,
        gamma_bar: f64,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        for (name, n) in [("k_elements", k_elements), ("m_antennas", m_antennas)] {
            if exact_sqrt(n).is_none() {
                return Err(Error::Configuration(format!(
                    "{name} = {n} is not a positive perfect square"
                )));
            }
        }
        if !(gamma_bar > 0.0 && gamma_bar.is_finite()) {
            return Err(Error::Configuration(format!(
                "gamma_bar must be positive and finite, got {gamma_bar}"
            )));
        }
        if trials == 0 {
            return Err(Error::Configuration("trials must be at least 1".into()));
        }
        Ok(Self {
            k_elements,
            m_antennas,
            gamma_bar,
            trials,
            seed,
            scenario_label: "custom".into(),
            link: LinkGeometry::symmetric(k_elements, m_antennas)?,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.scenario_label = label.into();
        self
    }

    pub fn with_gamma_bar(mut self, gamma_bar: f64) -> Self {
        self.gamma_bar = gamma_bar;
        self
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    /// Population standard deviation of the samples divided by `√trials`
    /// (for indicator samples this is the binomial `√(p(1−p)/n)`).
    pub std_error: f64,
    pub trials: u64,
}

/// Per-trial random streams derived from one seed.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    base: ChaCha8Rng,
}

impl TrialStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Fresh generator for `trial`, positioned at the start of its stream.
    #[inline]
    pub fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(trial);
        rng
    }
}

/// Welford running mean/variance; merged with Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    #[inline]
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> EstimateWithError {
        let n = self.n as f64;
        EstimateWithError {
            value: self.mean,
            std_error: (self.m2.max(0.0) / n).sqrt() / n.sqrt(),
            trials: self.n,
        }
    }
}

/// Runs `step` on the magnitude sum `Y` of every trial and folds the chunk
/// accumulators in chunk order.
fn fold_y_trials<A, I, S, M>(
    k: usize,
    trials: u64,
    seed: u64,
    exec: &Execution,
    init: I,
    step: S,
    merge: M,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, f64) + Sync + Send,
    M: Fn(&mut A, A),
{
    let streams = TrialStreams::new(seed);
    let chunks = trials.div_ceil(CHUNK_TRIALS) as usize;
    let partials = exec.map_indexed(chunks, |c| {
        let start = c as u64 * CHUNK_TRIALS;
        let end = (start + CHUNK_TRIALS).min(trials);
        let mut acc = init();
        for t in start..end {
            let y = sample_fading_magnitude_sum(k, &mut streams.stream(t));
            step(&mut acc, y);
        }
        acc
    });
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

fn check_k_trials(k: usize, trials: u64) -> Result<()> {
    if k == 0 {
        return Err(domain("K must be at least 1"));
    }
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    Ok(())
}

/// `Y` for trials `0..trials`, in trial order.
pub fn simulate_y_samples(k: usize, trials: u64, seed: u64, exec: &Execution) -> Result<Vec<f64>> {
    check_k_trials(k, trials)?;
    let streams = TrialStreams::new(seed);
    let chunks = trials.div_ceil(CHUNK_TRIALS) as usize;
    let parts = exec.map_indexed(chunks, |c| {
        let start = c as u64 * CHUNK_TRIALS;
        let end = (start + CHUNK_TRIALS).min(trials);
        (start..end)
            .map(|t| sample_fading_magnitude_sum(k, &mut streams.stream(t)))
            .collect::<Vec<f64>>()
    });
    Ok(parts.concat())
}

/// Optimal received SNR `M γ̄ Y²` for every trial, in trial order.
pub fn simulate_snr_samples(config: &SimulationConfig, exec: &Execution) -> Result<Vec<f64>> {
    let scale = config.m_antennas as f64 * config.gamma_bar;
    let mut ys = simulate_y_samples(config.k_elements, config.trials, config.seed, exec)?;
    for y in &mut ys {
        *y = scale * *y * *y;
    }
    Ok(ys)
}

/// Outage estimates `Pr(M γ̄ Y² ≤ γ_th)` for several `γ̄` from one set of draws.
pub fn outage_sweep(
    k: usize,
    m: usize,
    gamma_bars: &[f64],
    gamma_th: f64,
    trials: u64,
    seed: u64,
    exec: &Execution,
) -> Result<Vec<EstimateWithError>> {
    check_k_trials(k, trials)?;
    let scales = snr_scales(m, gamma_bars)?;
    let counts = fold_y_trials(
        k,
        trials,
        seed,
        exec,
        || vec![0u64; scales.len()],
        |acc, y| {
            let y2 = y * y;
            for (c, s) in acc.iter_mut().zip(&scales) {
                *c += u64::from(s * y2 <= gamma_th);
            }
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    );
    let n = trials as f64;
    Ok(counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            EstimateWithError {
                value: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
                trials,
            }
        })
        .collect())
}

/// Ergodic rate `E[log₂(1 + γ)]` for several `γ̄` from one set of draws.
pub fn rate_sweep(
    k: usize,
    m: usize,
    gamma_bars: &[f64],
    trials: u64,
    seed: u64,
    exec: &Execution,
) -> Result<Vec<EstimateWithError>> {
    check_k_trials(k, trials)?;
    let scales = snr_scales(m, gamma_bars)?;
    stats_sweep(k, trials, seed, exec, &scales, |snr| {
        snr.ln_1p() / std::f64::consts::LN_2
    })
}

/// Average SEP `E[α Q(√(β γ))]` for several `γ̄` from one set of draws.
pub fn sep_sweep(
    k: usize,
    m: usize,
    gamma_bars: &[f64],
    modulation: &ModulationParams,
    trials: u64,
    seed: u64,
    exec: &Execution,
) -> Result<Vec<EstimateWithError>> {
    check_k_trials(k, trials)?;
    let scales = snr_scales(m, gamma_bars)?;
    stats_sweep(k, trials, seed, exec, &scales, |snr| {
        modulation.conditional_sep(snr)
    })
}

fn stats_sweep<F>(
    k: usize,
    trials: u64,
    seed: u64,
    exec: &Execution,
    scales: &[f64],
    metric: F,
) -> Result<Vec<EstimateWithError>>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let stats = fold_y_trials(
        k,
        trials,
        seed,
        exec,
        || vec![RunningStats::default(); scales.len()],
        |acc, y| {
            let y2 = y * y;
            for (st, s) in acc.iter_mut().zip(scales) {
                st.push(metric(s * y2));
            }
        },
        |acc, part| acc.iter_mut().zip(&part).for_each(|(a, b)| a.merge(b)),
    );
    Ok(stats.iter().map(RunningStats::estimate).collect())
}

fn snr_scales(m: usize, gamma_bars: &[f64]) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(domain("M must be at least 1"));
    }
    gamma_bars
        .iter()
        .map(|&g| {
            if g >= 0.0 && g.is_finite() {
                Ok(m as f64 * g)
            } else {
                Err(domain(format!(
                    "average SNR must be finite and non-negative, got {g}"
                )))
            }
        })
        .collect()
}

pub fn estimate_outage(
    config: &SimulationConfig,
    gamma_th: f64,
    exec: &Execution,
) -> Result<EstimateWithError> {
    if gamma_th.is_nan() || gamma_th <= 0.0 {
        return Err(domain(format!(
            "outage threshold must be positive, got {gamma_th}"
        )));
    }
    single(outage_sweep(
        config.k_elements,
        config.m_antennas,
        &[config.gamma_bar],
        gamma_th,
        config.trials,
        config.seed,
        exec,
    )?)
}

pub fn estimate_rate(config: &SimulationConfig, exec: &Execution) -> Result<EstimateWithError> {
    single(rate_sweep(
        config.k_elements,
        config.m_antennas,
        &[config.gamma_bar],
        config.trials,
        config.seed,
        exec,
    )?)
}

/// Averages the conditional SEP over channel draws (no symbol simulation).
pub fn estimate_sep(
    config: &SimulationConfig,
    modulation: &ModulationParams,
    exec: &Execution,
) -> Result<EstimateWithError> {
    single(sep_sweep(
        config.k_elements,
        config.m_antennas,
        &[config.gamma_bar],
        modulation,
        config.trials,
        config.seed,
        exec,
    )?)
}

fn single(mut v: Vec<EstimateWithError>) -> Result<EstimateWithError> {
    v.pop().ok_or_else(|| domain("empty sweep"))
}

/// Fraction of `Y` samples at or below each point of an ascending grid.
pub fn empirical_cdf_y(
    k: usize,
    trials: u64,
    seed: u64,
    grid: &[f64],
    exec: &Execution,
) -> Result<Vec<f64>> {
    if grid.iter().any(|g| g.is_nan()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(domain("empirical_cdf_y: grid must be sorted ascending"));
    }
    let mut ys = simulate_y_samples(k, trials, seed, exec)?;
    ys.sort_unstable_by(f64::total_cmp);
    Ok(grid.iter().map(|&g| empirical_cdf_sorted(&ys, g)).collect())
}

/// Empirical CDF of ascending `sorted` at `x`.
pub fn empirical_cdf_sorted(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Kolmogorov distance between the empirical CDF of ascending `sorted`
/// and `cdf`, evaluated at `quantiles` evenly spaced sample quantiles
/// (both one-sided limits of the step are compared).
pub fn kolmogorov_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F, quantiles: usize) -> f64 {
    let n = sorted.len();
    if n == 0 || quantiles == 0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for j in 1..=quantiles {
        let i = ((j as f64 / (quantiles + 1) as f64) * n as f64) as usize;
        let i = i.min(n - 1);
        let f = cdf(sorted[i]);
        let upper = (i + 1) as f64 / n as f64;
        let lower = i as f64 / n as f64;
        worst = worst.max((f - upper).abs()).max((f - lower).abs());
    }
    worst
}

/// Outcome of [`verify_beamforming_pipeline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    pub draws: u64,
    pub max_rel_deviation: f64,
    /// Trial (stream number) with the largest deviation.
    pub worst_trial: u64,
    pub tolerance: f64,
}

/// Builds the full channel for each draw, runs the optimal beamformer chain
/// and compares the achieved SNR to `M γ̄ (Σ|hᵢ|)²`.
///
/// Fails with [`Error::Verification`] naming the worst trial if any draw
/// deviates by more than [`PIPELINE_TOLERANCE`].
pub fn verify_beamforming_pipeline(
    config: &SimulationConfig,
    draws: u64,
    exec: &Execution,
) -> Result<VerificationReport> {
    if draws == 0 {
        return Err(domain("draws must be at least 1"));
    }
    let streams = TrialStreams::new(config.seed);
    let los = config.link.los_channel();
    let chunks = draws.div_ceil(CHUNK_TRIALS) as usize;
    let partials = exec.map_indexed(chunks, |c| -> Result<(f64, u64)> {
        let start = c as u64 * CHUNK_TRIALS;
        let end = (start + CHUNK_TRIALS).min(draws);
        let mut worst = (0.0f64, start);
        for t in start..end {
            let h = sample_fading(config.k_elements, &mut streams.stream(t))?;
            let channel = cascaded_channel(&h, &los)?;
            let achieved = optimize(&channel, config.gamma_bar)?.snr;
            let reference = closed_form_snr(&h, config.m_antennas, config.gamma_bar)?;
            let dev = ((achieved - reference) / reference).abs();
            if dev > worst.0 || dev.is_nan() {
                worst = (dev, t);
            }
        }
        Ok(worst)
    });
    let mut worst = (0.0f64, 0u64);
    for p in partials {
        let p = p?;
        if p.0 > worst.0 || p.0.is_nan() {
            worst = p;
        }
    }
    if worst.0.is_nan() || worst.0 > PIPELINE_TOLERANCE {
        return Err(Error::Verification {
            trial: worst.1,
            deviation: worst.0,
            tolerance: PIPELINE_TOLERANCE,
        });
    }
    Ok(VerificationReport {
        draws,
        max_rel_deviation: worst.0,
        worst_trial: worst.1,
        tolerance: PIPELINE_TOLERANCE,
    })
}

/// Outcome of [`certify_against_lattice`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeReport {
    pub k_elements: usize,
    pub m_antennas: usize,
    pub channels: u64,
    pub grid_points: usize,
    /// Largest `lattice SNR / closed-form SNR` over all channels; must not exceed 1.
    pub max_ratio: f64,
    /// Smallest ratio; must stay above `1 − slack`.
    pub min_ratio: f64,
    /// Quantization loss bound `1 − cos²(π / grid)`.
    pub slack: f64,
    pub passed: bool,
}

/// Compares the closed-form optimum with an exhaustive phase-lattice search
/// on `channels` random draws. Arrays are half-wavelength linear, so any
/// `K <= MAX_BRUTE_FORCE_ELEMENTS` is allowed.
pub fn certify_against_lattice(
    k_elements: usize,
    m_antennas: usize,
    channels: u64,
    grid_points: usize,
    seed: u64,
    exec: &Execution,
) -> Result<LatticeReport> {
    if channels == 0 {
        return Err(domain("channels must be at least 1"));
    }
    let los = LosChannel::from_responses(
        linear_array_response(k_elements, 0.5, 0.7)?,
        linear_array_response(m_antennas, 0.5, 0.3)?,
    )?;
    let streams = TrialStreams::new(seed);
    let (mut max_ratio, mut min_ratio) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..channels {
        let h = sample_fading(k_elements, &mut streams.stream(t))?;
        let channel = cascaded_channel(&h, &los)?;
        let closed = optimize(&channel, 1.0)?.snr;
        let lattice = brute_force_phase_search(&channel, 1.0, grid_points, exec)?.snr;
        let ratio = lattice / closed;
        max_ratio = max_ratio.max(ratio);
        min_ratio = min_ratio.min(ratio);
    }
    let slack = 1.0 - (std::f64::consts::PI / grid_points as f64).cos().powi(2);
    let passed = max_ratio <= 1.0 + 1e-12 && min_ratio >= (1.0 - slack) * (1.0 - 1e-12);
    Ok(LatticeReport {
        k_elements,
        m_antennas,
        channels,
        grid_points,
        max_ratio,
        min_ratio,
        slack,
        passed,
    })
}
