mod commands;
mod manifest;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pipeadc::config::{AdcConfig, Preset};

/// Pipelined ADC behavioral simulator and converter metrology.
#[derive(Debug, Parser)]
#[command(name = "pipeadc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the simulator against its reference converters.
    Verify(Common),
    /// Code-density or transition-level DNL/INL.
    Linearity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Method::Histogram)]
        method: Method,
        /// Ramp length for the histogram method.
        #[arg(long, default_value_t = pipeadc::testbench::DEFAULT_RAMP_POINTS)]
        points: usize,
    },
    /// Coherent sine FFT with SNDR, SFDR and ENOB.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = pipeadc::testbench::DEFAULT_NFFT)]
        nfft: usize,
        /// Signal bin (number of input periods in the record).
        #[arg(long, default_value_t = pipeadc::testbench::DEFAULT_SIGNAL_BIN)]
        bin: usize,
        /// Peak amplitude as a fraction of full scale.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Analyze the analog stimulus without converting it.
        #[arg(long)]
        passthrough: bool,
    },
    /// Sensor readout frame and conversion-rate budget.
    Budget {
        #[arg(long, default_value_t = 64)]
        rows: u32,
        #[arg(long, default_value_t = 64)]
        cols: u32,
        #[arg(long, default_value_t = 1)]
        channels: u32,
        #[arg(long, default_value_t = 100.0)]
        pixel_time_ns: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Measure worst DNL/INL, SNDR and ENOB across values of one stage parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Seeds per value, counting up from the configuration seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 16_384)]
        points: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Histogram,
    Transitions,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON converter configuration; overrides the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "ideal")]
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Open-loop gain applied to every stage, dB.
    #[arg(long)]
    gain_db: Option<f64>,
    /// Conversion rate, samples per second.
    #[arg(long)]
    clock_hz: Option<f64>,
}

impl Common {
    /// Preset, then file, then flags.
    fn load(&self) -> pipeadc::Result<AdcConfig> {
        let mut cfg = match &self.config {
            Some(path) => AdcConfig::load(path)?,
            None => self.preset.parse::<Preset>()?.config(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(db) = self.gain_db {
            cfg = cfg.map_stages(|s| s.open_loop_gain_db = Some(db));
        }
        if let Some(hz) = self.clock_hz {
            cfg.clock_hz = hz;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn source(&self) -> String {
        match &self.config {
            Some(p) => p.display().to_string(),
            None => format!("preset:{}", self.preset),
        }
    }
}

/// Exit status for a run.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: configuration, flags or I/O.
    Invalid(String),
    /// Checks ran and did not pass.
    Rejected(String),
}

impl From<pipeadc::AdcError> for Failure {
    fn from(e: pipeadc::AdcError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(2)
        }
    }
}
