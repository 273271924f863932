//! Runs a resolved [`ExperimentSpec`] and tabulates analytic and Monte-Carlo columns.

use ris_miso::montecarlo::{
    certify_against_lattice, outage_sweep, rate_sweep, sep_sweep, simulate_y_samples,
    verify_beamforming_pipeline, SimulationConfig,
};
use ris_miso::performance::{
    asymptotic_outage, db_to_linear, leading_order_outage, outage_probability, rate_upper_bound,
    sep_exact, sep_upper_bound, DEFAULT_SEP_ORDER,
};
use ris_miso::snr_statistics::{mean_snr, DistributionFit, YDistributionModel};
use ris_miso::specfun::gauss_legendre;
use ris_miso::{Error, Execution};

use crate::error::{CliError, Result};
use crate::output::{ExperimentResult, Metadata};
use crate::spec::{Command, ExperimentSpec};

/// RIS sizes and BS sizes covered by the exhaustive lattice check in `verify`.
pub const LATTICE_K: [usize; 2] = [2, 3];
pub const LATTICE_M: [usize; 2] = [1, 4];
pub const LATTICE_CHANNELS: u64 = 50;
pub const LATTICE_GRID: usize = 128;

/// Half-width, in standard deviations, of the Y grid used by `dist`.
const DIST_SPAN_SIGMAS: f64 = 6.0;

pub fn run_experiment(spec: &ExperimentSpec, exec: &Execution) -> Result<ExperimentResult> {
    let (columns, rows) = match spec.command {
        Command::Dist => dist(spec, exec)?,
        Command::Outage => outage(spec, exec)?,
        Command::Rate => rate(spec, exec)?,
        Command::Sep => sep(spec, exec)?,
        Command::Verify => verify(spec, exec)?,
    };
    for (r, row) in rows.iter().enumerate() {
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(CliError::Core(Error::Domain(format!(
                "non-finite value in column {} of row {r}; narrow the sweep",
                columns[c]
            ))));
        }
    }
    Ok(ExperimentResult {
        metadata: Metadata::now(spec.clone()),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    })
}

/// `true` unless a `verify` run recorded a failed check.
pub fn all_checks_passed(result: &ExperimentResult) -> bool {
    match result.column("passed") {
        Some(flags) => flags.iter().all(|&f| f == 1.0),
        None => true,
    }
}

type Table = (Vec<&'static str>, Vec<Vec<f64>>);

fn gamma_bars(spec: &ExperimentSpec) -> (Vec<f64>, Vec<f64>) {
    let dbs = spec
        .sweep
        .expect("sweep resolved by validate_spec")
        .values_db();
    let lin = dbs.iter().map(|&d| db_to_linear(d)).collect();
    (dbs, lin)
}

fn dist(spec: &ExperimentSpec, exec: &Execution) -> Result<Table> {
    let k = spec.k_elements;
    let n = spec.grid_points.expect("grid resolved by validate_spec");
    let model = YDistributionModel::new(k)?;
    let (mu, sigma) = (model.clt.mu_y(), model.clt.sigma_y());
    let lo = (mu - DIST_SPAN_SIGMAS * sigma).max(0.0);
    let hi = mu + DIST_SPAN_SIGMAS * sigma;
    let h = (hi - lo) / (n - 1) as f64;

    let mut ys = simulate_y_samples(k, spec.trials, spec.seed, exec)?;
    ys.sort_unstable_by(f64::total_cmp);
    let total = ys.len() as f64;
    let count_le = |x: f64| ys.partition_point(|&v| v <= x) as f64;

    let rows = (0..n)
        .map(|i| {
            let y = if i + 1 == n { hi } else { lo + h * i as f64 };
            let density = (count_le(y + 0.5 * h) - count_le(y - 0.5 * h)) / (total * h);
            vec![
                y,
                count_le(y) / total,
                model.cdf(y, DistributionFit::Clt),
                model.cdf(y, DistributionFit::Gamma),
                density,
                model.pdf(y, DistributionFit::Clt),
                model.pdf(y, DistributionFit::Gamma),
            ]
        })
        .collect();
    let columns = vec![
        "y",
        "empirical_cdf",
        "clt_cdf",
        "gamma_cdf",
        "empirical_pdf",
        "clt_pdf",
        "gamma_pdf",
    ];
    Ok((columns, rows))
}

fn outage(spec: &ExperimentSpec, exec: &Execution) -> Result<Table> {
    let (k, m) = (spec.k_elements, spec.m_antennas);
    let gth = db_to_linear(
        spec.gamma_th_db
            .expect("threshold resolved by validate_spec"),
    );
    let (dbs, gbs) = gamma_bars(spec);
    let mc = outage_sweep(k, m, &gbs, gth, spec.trials, spec.seed, exec)?;
    let mut rows = Vec::with_capacity(gbs.len());
    for ((&db, &g), est) in dbs.iter().zip(&gbs).zip(&mc) {
        let raw = asymptotic_outage(gth, g, m, k)?;
        rows.push(vec![
            db,
            g,
            outage_probability(gth, k, m, g, DistributionFit::Clt)?,
            outage_probability(gth, k, m, g, DistributionFit::Gamma)?,
            raw.min(1.0),
            raw,
            leading_order_outage(gth, g, m, k)?,
            est.value,
            est.std_error,
        ]);
    }
    let columns = vec![
        "gamma_bar_db",
        "gamma_bar",
        "clt",
        "gamma",
        "asymptotic",
        "asymptotic_raw",
        "leading_order",
        "mc_value",
        "mc_std_error",
    ];
    Ok((columns, rows))
}

fn rate(spec: &ExperimentSpec, exec: &Execution) -> Result<Table> {
    let (k, m) = (spec.k_elements, spec.m_antennas);
    let (dbs, gbs) = gamma_bars(spec);
    let mc = rate_sweep(k, m, &gbs, spec.trials, spec.seed, exec)?;
    let mut rows = Vec::with_capacity(gbs.len());
    for ((&db, &g), est) in dbs.iter().zip(&gbs).zip(&mc) {
        rows.push(vec![
            db,
            g,
            mean_snr(m, k, g)?,
            rate_upper_bound(m, k, g)?,
            est.value,
            est.std_error,
        ]);
    }
    Ok((
        vec![
            "gamma_bar_db",
            "gamma_bar",
            "mean_snr",
            "upper_bound",
            "mc_value",
            "mc_std_error",
        ],
        rows,
    ))
}

fn sep(spec: &ExperimentSpec, exec: &Execution) -> Result<Table> {
    let (k, m) = (spec.k_elements, spec.m_antennas);
    let modulation = spec
        .modulation
        .as_ref()
        .expect("modulation resolved by validate_spec")
        .params()?;
    let rule = gauss_legendre(DEFAULT_SEP_ORDER)?;
    let (dbs, gbs) = gamma_bars(spec);
    let mc = sep_sweep(k, m, &gbs, &modulation, spec.trials, spec.seed, exec)?;
    let mut rows = Vec::with_capacity(gbs.len());
    for ((&db, &g), est) in dbs.iter().zip(&gbs).zip(&mc) {
        rows.push(vec![
            db,
            g,
            sep_exact(&modulation, m, k, g, &rule)?,
            sep_upper_bound(&modulation, m, k, g)?,
            est.value,
            est.std_error,
        ]);
    }
    Ok((
        vec![
            "gamma_bar_db",
            "gamma_bar",
            "exact",
            "upper_bound",
            "mc_value",
            "mc_std_error",
        ],
        rows,
    ))
}

fn verify(spec: &ExperimentSpec, exec: &Execution) -> Result<Table> {
    let mut rows = Vec::new();
    for k in LATTICE_K {
        for m in LATTICE_M {
            let r = certify_against_lattice(k, m, LATTICE_CHANNELS, LATTICE_GRID, spec.seed, exec)?;
            rows.push(vec![
                k as f64,
                m as f64,
                r.channels as f64,
                r.grid_points as f64,
                1.0 - r.min_ratio,
                r.slack,
                r.max_ratio - 1.0,
                0.0,
                f64::from(u8::from(r.passed)),
            ]);
        }
    }

    let config = SimulationConfig::new(
        spec.k_elements,
        spec.m_antennas,
        1.0,
        spec.trials,
        spec.seed,
    )?;
    let pipeline = match verify_beamforming_pipeline(&config, spec.trials, exec) {
        Ok(r) => vec![
            r.max_rel_deviation,
            r.tolerance,
            0.0,
            r.worst_trial as f64,
            1.0,
        ],
        Err(Error::Verification {
            trial,
            deviation,
            tolerance,
        }) => vec![deviation, tolerance, 0.0, trial as f64, 0.0],
        Err(e) => return Err(e.into()),
    };
    let mut row = vec![
        spec.k_elements as f64,
        spec.m_antennas as f64,
        spec.trials as f64,
        0.0,
    ];
    row.extend(pipeline);
    rows.push(row);
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));

    let columns = vec![
        "k_elements",
        "m_antennas",
        "draws",
        "grid_points",
        "max_rel_deviation",
        "tolerance",
        "max_lattice_excess",
        "worst_trial",
        "passed",
    ];
    Ok((columns, rows))
}
