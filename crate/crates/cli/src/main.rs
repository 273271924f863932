use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ris_miso::Execution;
use ris_miso_cli::spec::{Modulation, Sweep};
use ris_miso_cli::{
    all_checks_passed, run_experiment, validate_spec, CliError, Command, OutputFormat, RawSpec,
    Scenario,
};

/// Reproduce RIS-assisted MISO outage, rate, SEP and distribution sweeps.
#[derive(Debug, Parser)]
#[command(name = "ris-miso", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Preset array sizes, or `custom` with --k and --m.
    #[arg(value_enum)]
    scenario: Option<Scenario>,
    /// RIS elements (custom scenario, perfect square).
    #[arg(long)]
    k: Option<usize>,
    /// BS antennas (custom scenario, perfect square).
    #[arg(long)]
    m: Option<usize>,
    /// Average transmit SNR sweep in dB, START:STOP:POINTS.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_sweep)]
    sweep: Option<Sweep>,
    /// Outage threshold in dB (outage only, default 10).
    #[arg(long, allow_hyphen_values = true)]
    gamma_th_db: Option<f64>,
    /// bpsk, qpsk or custom:ALPHA,BETA (sep only, default bpsk).
    #[arg(long)]
    modulation: Option<String>,
    /// Number of Y grid points (dist only, default 201).
    #[arg(long)]
    grid_points: Option<usize>,
    /// Monte-Carlo trials (pipeline draws for verify).
    #[arg(long)]
    trials: Option<u64>,
    /// RNG seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Cap on worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// JSON experiment document; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn raw_from_args(args: &Args) -> Result<RawSpec, CliError> {
    let base = match &args.config {
        Some(path) => {
            let file = File::open(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_reader(file)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RawSpec::default(),
    };
    if let Some(m) = &args.modulation {
        m.parse::<Modulation>()?;
    }
    Ok(base.overlay(RawSpec {
        command: args.command,
        scenario: args.scenario,
        k_elements: args.k,
        m_antennas: args.m,
        sweep: args.sweep,
        gamma_th_db: args.gamma_th_db,
        modulation: args.modulation.clone(),
        grid_points: args.grid_points,
        trials: args.trials,
        seed: args.seed,
        output_path: args.out.as_ref().map(|p| p.display().to_string()),
        format: args.format,
    }))
}

fn run(args: &Args) -> Result<bool, CliError> {
    let spec = validate_spec(raw_from_args(args)?)?;
    let exec = match args.workers {
        Some(0) => return Err(CliError::Config("--workers must be at least 1".into())),
        Some(w) => Execution::parallel(Some(w)),
        None => Execution::default(),
    };
    let result = run_experiment(&spec, &exec)?;
    match &spec.output_path {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            result.write(spec.format, &mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            result.write(spec.format, &mut out)?;
            out.flush()?;
        }
    }
    Ok(all_checks_passed(&result))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("ris-miso: verification failed; see the passed column");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("ris-miso: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
