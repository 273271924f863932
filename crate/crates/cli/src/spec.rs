//! Experiment specification: raw (flags or JSON document) and resolved forms.

use std::fmt;
use std::str::FromStr;

use ris_miso::channel::exact_sqrt;
use ris_miso::performance::ModulationParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Dist,
    Outage,
    Rate,
    Sep,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dist => "dist",
            Command::Outage => "outage",
            Command::Rate => "rate",
            Command::Sep => "sep",
            Command::Verify => "verify",
        }
    }

    /// Monte-Carlo trials used when none are given.
    pub fn default_trials(self) -> u64 {
        match self {
            Command::Dist | Command::Rate => 1_000_000,
            Command::Outage | Command::Sep => 10_000_000,
            Command::Verify => 1000,
        }
    }

    /// γ̄ sweep used when none is given.
    pub fn default_sweep(self) -> Option<Sweep> {
        let (start_db, stop_db, points) = match self {
            Command::Outage => (-35.0, -5.0, 13),
            Command::Rate => (-10.0, 30.0, 9),
            Command::Sep => (-45.0, -15.0, 13),
            Command::Dist | Command::Verify => return None,
        };
        Some(Sweep {
            start_db,
            stop_db,
            points,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Case1,
    Case2,
    Case3,
    Custom,
}

impl Scenario {
    /// `(K, M)` of the preset.
    pub fn preset(self) -> Option<(usize, usize)> {
        match self {
            Scenario::Case1 => Some((16, 16)),
            Scenario::Case2 => Some((16, 36)),
            Scenario::Case3 => Some((36, 16)),
            Scenario::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Evenly spaced γ̄ grid in dB, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start_db: f64,
    pub stop_db: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values_db(&self) -> Vec<f64> {
        let step = (self.stop_db - self.start_db) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop_db
                } else {
                    self.start_db + step * i as f64
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.start_db.is_finite() && self.stop_db.is_finite()) {
            return Err(CliError::Config("sweep bounds must be finite".into()));
        }
        if self.start_db >= self.stop_db {
            return Err(CliError::Config(format!(
                "sweep start ({}) must be below stop ({})",
                self.start_db, self.stop_db
            )));
        }
        if self.points < 2 {
            return Err(CliError::Config(format!(
                "sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }
}

impl FromStr for Sweep {
    type Err = CliError;

    /// `START_DB:STOP_DB:POINTS`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            CliError::Config(format!(
                "sweep must look like START_DB:STOP_DB:POINTS, got {s:?}"
            ))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        Ok(Sweep {
            start_db: a.trim().parse().map_err(|_| bad())?,
            stop_db: b.trim().parse().map_err(|_| bad())?,
            points: n.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Modulation constants `(α, β)` of `SEP = E[α Q(√(βγ))]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modulation {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
}

impl Modulation {
    pub fn params(&self) -> Result<ModulationParams> {
        Ok(ModulationParams::new(
            self.alpha,
            self.beta,
            self.name.clone(),
        )?)
    }
}

impl FromStr for Modulation {
    type Err = CliError;

    /// `bpsk`, `qpsk` or `custom:ALPHA,BETA`.
    fn from_str(s: &str) -> Result<Self> {
        let p = match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => ModulationParams::bpsk(),
            "qpsk" => ModulationParams::qpsk(),
            other => {
                let bad = || {
                    CliError::Config(format!(
                        "modulation must be bpsk, qpsk or custom:ALPHA,BETA, got {s:?}"
                    ))
                };
                let body = other.strip_prefix("custom:").ok_or_else(bad)?;
                let (a, b) = body.split_once(',').ok_or_else(bad)?;
                let alpha: f64 = a.trim().parse().map_err(|_| bad())?;
                let beta: f64 = b.trim().parse().map_err(|_| bad())?;
                ModulationParams::new(alpha, beta, "custom")
                    .map_err(|e| CliError::Config(e.to_string()))?
            }
        };
        Ok(Modulation {
            name: p.name().to_string(),
            alpha: p.alpha(),
            beta: p.beta(),
        })
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name.as_str() {
            "bpsk" | "qpsk" => f.write_str(&self.name),
            _ => write!(f, "custom:{},{}", self.alpha, self.beta),
        }
    }
}

/// Unvalidated experiment description, as given on the command line or in a
/// JSON configuration document. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub command: Option<Command>,
    pub scenario: Option<Scenario>,
    pub k_elements: Option<usize>,
    pub m_antennas: Option<usize>,
    pub sweep: Option<Sweep>,
    pub gamma_th_db: Option<f64>,
    pub modulation: Option<String>,
    pub grid_points: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub output_path: Option<String>,
    pub format: Option<OutputFormat>,
}

impl RawSpec {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RawSpec) -> RawSpec {
        RawSpec {
            command: over.command.or(self.command),
            scenario: over.scenario.or(self.scenario),
            k_elements: over.k_elements.or(self.k_elements),
            m_antennas: over.m_antennas.or(self.m_antennas),
            sweep: over.sweep.or(self.sweep),
            gamma_th_db: over.gamma_th_db.or(self.gamma_th_db),
            modulation: over.modulation.or(self.modulation),
            grid_points: over.grid_points.or(self.grid_points),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            output_path: over.output_path.or(self.output_path),
            format: over.format.or(self.format),
        }
    }
}

/// Y-grid size for `dist` when none is given.
pub const DEFAULT_GRID_POINTS: usize = 201;
pub const DEFAULT_GAMMA_TH_DB: f64 = 10.0;
pub const DEFAULT_SEED: u64 = 0;

/// Fully resolved experiment; echoed verbatim in result metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: Command,
    pub scenario: Scenario,
    pub k_elements: usize,
    pub m_antennas: usize,
    /// γ̄ sweep (`outage`, `rate`, `sep`).
    pub sweep: Option<Sweep>,
    /// Outage threshold (`outage`).
    pub gamma_th_db: Option<f64>,
    /// `sep` only.
    pub modulation: Option<Modulation>,
    /// Points of the Y grid (`dist`).
    pub grid_points: Option<usize>,
    /// Monte-Carlo trials; pipeline draws for `verify`.
    pub trials: u64,
    pub seed: u64,
    pub output_path: Option<String>,
    pub format: OutputFormat,
}

fn require_absent<T>(value: &Option<T>, field: &str, command: Command) -> Result<()> {
    match value {
        Some(_) => Err(CliError::Config(format!(
            "{field} does not apply to the {} command",
            command.name()
        ))),
        None => Ok(()),
    }
}

fn check_square(field: &str, n: usize) -> Result<()> {
    match exact_sqrt(n) {
        Some(_) => Ok(()),
        None => Err(CliError::Config(format!(
            "{field} = {n} is not a positive perfect square"
        ))),
    }
}

/// Expands presets, applies defaults and rejects inconsistent fields.
pub fn validate_spec(raw: RawSpec) -> Result<ExperimentSpec> {
    let command = raw
        .command
        .ok_or_else(|| CliError::Config("missing required field: command".into()))?;
    let scenario = raw
        .scenario
        .ok_or_else(|| CliError::Config("missing required field: scenario".into()))?;

    let (k_elements, m_antennas) = match scenario.preset() {
        Some(km) => {
            if raw.k_elements.is_some() || raw.m_antennas.is_some() {
                return Err(CliError::Config(
                    "k_elements/m_antennas are fixed by presets; use the custom scenario".into(),
                ));
            }
            km
        }
        None => {
            let k = raw
                .k_elements
                .ok_or_else(|| CliError::Config("custom scenario requires k_elements".into()))?;
            let m = raw
                .m_antennas
                .ok_or_else(|| CliError::Config("custom scenario requires m_antennas".into()))?;
            (k, m)
        }
    };
    check_square("k_elements", k_elements)?;
    check_square("m_antennas", m_antennas)?;

    let sweep = match command.default_sweep() {
        Some(default) => {
            let s = raw.sweep.unwrap_or(default);
            s.validate()?;
            Some(s)
        }
        None => {
            require_absent(&raw.sweep, "sweep", command)?;
            None
        }
    };

    let gamma_th_db = if command == Command::Outage {
        let g = raw.gamma_th_db.unwrap_or(DEFAULT_GAMMA_TH_DB);
        if !g.is_finite() {
            return Err(CliError::Config("gamma_th_db must be finite".into()));
        }
        Some(g)
    } else {
        require_absent(&raw.gamma_th_db, "gamma_th_db", command)?;
        None
    };

    let modulation = if command == Command::Sep {
        let m: Modulation = raw.modulation.as_deref().unwrap_or("bpsk").parse()?;
        m.params().map_err(|e| CliError::Config(e.to_string()))?;
        Some(m)
    } else {
        require_absent(&raw.modulation, "modulation", command)?;
        None
    };

    let grid_points = if command == Command::Dist {
        let n = raw.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if n < 2 {
            return Err(CliError::Config(format!(
                "grid_points must be at least 2, got {n}"
            )));
        }
        Some(n)
    } else {
        require_absent(&raw.grid_points, "grid_points", command)?;
        None
    };

    let trials = raw.trials.unwrap_or_else(|| command.default_trials());
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }

    Ok(ExperimentSpec {
        command,
        scenario,
        k_elements,
        m_antennas,
        sweep,
        gamma_th_db,
        modulation,
        grid_points,
        trials,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        output_path: raw.output_path,
        format: raw.format.unwrap_or_default(),
    })
}
