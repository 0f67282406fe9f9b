use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pipeadc::budget::{budget_report, SensorGeometry};
use pipeadc::config::AdcConfig;
use pipeadc::metrology::LinearityReport;
use pipeadc::oracle::{brute_force_convert, ideal_quantize, IdealQuantizerSpec};
use pipeadc::pipeline::run_stream;
use pipeadc::report::{to_json, write_file, write_linearity_csv, write_spectrum_csv, write_sweep_csv};
use pipeadc::testbench::{ramp_linearity, sine_spectrum, transition_linearity, SineTest, DEFAULT_RAMP_POINTS};
use pipeadc::AdcError;

use crate::manifest::RunManifest;
use crate::sweep::{run_sweep, Axis};
use crate::{Command, Common, Failure, Method};

type CmdResult = Result<(), Failure>;

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Invalid(format!("{}: {e}", dir.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> pipeadc::Result<()>) -> pipeadc::Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Verify(common) => verify(&common),
        Command::Linearity { common, method, points } => linearity(&common, method, points),
        Command::Spectrum {
            common,
            nfft,
            bin,
            amplitude,
            passthrough,
        } => spectrum(
            &common,
            &SineTest {
                nfft,
                signal_bin: bin,
                amplitude_fs: amplitude,
                passthrough,
            },
        ),
        Command::Budget {
            rows,
            cols,
            channels,
            pixel_time_ns,
            out,
        } => budget(
            &SensorGeometry {
                rows,
                cols,
                adc_channels: channels,
                pixel_time_s: pixel_time_ns / 1e9,
            },
            &out,
        ),
        Command::Sweep {
            common,
            axis,
            values,
            seeds,
            points,
        } => sweep(&common, &axis, &values, seeds, points),
    }
}

#[derive(Debug, Serialize)]
struct CheckResult {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    checks: Vec<CheckResult>,
    ideal_worst_dnl: f64,
    ideal_worst_inl: f64,
    config_worst_dnl: f64,
    config_worst_inl: f64,
}

/// Number of random inputs in the streamed-versus-reference check.
const VERIFY_RANDOM_SAMPLES: usize = 10_000;
/// Points on the ideal-quantizer comparison grid.
const VERIFY_GRID_POINTS: usize = 65_536;

fn verify(common: &Common) -> CmdResult {
    let cfg = common.load()?;
    prepare_out(&common.out)?;
    let mut checks = Vec::new();

    // Ideal converter of the same geometry against the closed-form quantizer,
    // on a grid offset half a step from every transition.
    let ideal = AdcConfig {
        stages: vec![Default::default(); cfg.resolution as usize],
        reported: None,
        ..cfg.clone()
    };
    let spec = IdealQuantizerSpec::new(ideal.resolution, ideal.refs)?;
    let step = ideal.refs.full_scale() / VERIFY_GRID_POINTS as f64;
    let grid: Vec<f64> = (0..VERIFY_GRID_POINTS)
        .map(|i| ideal.refs.vrefn + (i as f64 + 0.5) * step)
        .collect();
    let got = run_stream(&grid, &ideal)?.codes;
    let mismatches: Vec<usize> = (0..grid.len()).filter(|&i| got[i] != ideal_quantize(grid[i], &spec)).collect();
    checks.push(CheckResult {
        name: "ideal pipeline equals closed-form quantizer",
        passed: mismatches.is_empty(),
        detail: format!("{} mismatches over {} grid points{}", mismatches.len(), grid.len(), first_diff(&mismatches, &grid)),
    });

    // The configured converter, streamed, against the plain-loop evaluator.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let margin = 0.05 * cfg.refs.full_scale();
    let xs: Vec<f64> = (0..VERIFY_RANDOM_SAMPLES)
        .map(|_| rng.random_range(cfg.refs.vrefn - margin..cfg.refs.vrefp + margin))
        .collect();
    let streamed = run_stream(&xs, &cfg)?.codes;
    let mut diffs = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        if brute_force_convert(x, &cfg, i as u64)? != streamed[i] {
            diffs.push(i);
        }
    }
    checks.push(CheckResult {
        name: "pipeline equals stage-by-stage reference",
        passed: diffs.is_empty(),
        detail: format!("{} mismatches over {} random inputs{}", diffs.len(), xs.len(), first_diff(&diffs, &xs)),
    });

    let ideal_lin = ramp_linearity(&ideal, DEFAULT_RAMP_POINTS)?;
    checks.push(CheckResult {
        name: "ideal code-density linearity within 0.02 LSB",
        passed: ideal_lin.worst_dnl <= 0.02 && ideal_lin.worst_inl <= 0.02,
        detail: format!("worst DNL {} LSB, worst INL {} LSB", ideal_lin.worst_dnl, ideal_lin.worst_inl),
    });
    let cfg_lin = ramp_linearity(&cfg, DEFAULT_RAMP_POINTS)?;

    for c in &checks {
        println!("[{}] {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("config worst DNL {} LSB, worst INL {} LSB", cfg_lin.worst_dnl, cfg_lin.worst_inl);

    let report = VerifyReport {
        ideal_worst_dnl: ideal_lin.worst_dnl,
        ideal_worst_inl: ideal_lin.worst_inl,
        config_worst_dnl: cfg_lin.worst_dnl,
        config_worst_inl: cfg_lin.worst_inl,
        checks,
    };
    write_file(&common.out.join("verify.json"), to_json(&report)?.as_bytes())?;
    manifest(common, &cfg, "verify", vec!["verify.json"])?;
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Rejected(failed.join("; ")))
    }
}

fn first_diff(idx: &[usize], xs: &[f64]) -> String {
    idx.first().map(|&i| format!("; first at input {}", xs[i])).unwrap_or_default()
}

fn manifest(common: &Common, cfg: &AdcConfig, command: &str, artifacts: Vec<&str>) -> Result<(), Failure> {
    RunManifest {
        command,
        config_source: common.source(),
        seed: Some(cfg.seed),
        output_dir: &common.out,
        artifacts,
        config_json: Some(cfg.to_json_pretty()?),
    }
    .write()?;
    Ok(())
}

fn linearity(common: &Common, method: Method, points: usize) -> CmdResult {
    let cfg = common.load()?;
    prepare_out(&common.out)?;
    let report: LinearityReport = match method {
        Method::Histogram => ramp_linearity(&cfg, points)?,
        Method::Transitions => transition_linearity(&cfg)?,
    };
    write_file(
        &common.out.join("linearity.csv"),
        &csv_bytes(|b| write_linearity_csv(&report, b))?,
    )?;
    write_file(&common.out.join("linearity.json"), to_json(&report)?.as_bytes())?;
    manifest(common, &cfg, "linearity", vec!["linearity.csv", "linearity.json"])?;
    println!("worst DNL {} LSB", report.worst_dnl);
    println!("worst INL {} LSB", report.worst_inl);
    if !report.missing_codes.is_empty() {
        println!("missing codes (DNL = -1): {:?}", report.missing_codes);
    }
    Ok(())
}

fn spectrum(common: &Common, test: &SineTest) -> CmdResult {
    let cfg = common.load()?;
    prepare_out(&common.out)?;
    let report = sine_spectrum(&cfg, test)?;
    write_file(
        &common.out.join("spectrum.csv"),
        &csv_bytes(|b| write_spectrum_csv(&report, b))?,
    )?;
    write_file(&common.out.join("spectrum.json"), to_json(&report)?.as_bytes())?;
    manifest(common, &cfg, "spectrum", vec!["spectrum.csv", "spectrum.json"])?;
    println!("SNDR {} dB", report.sndr_db);
    println!("SFDR {} dB", report.sfdr_db);
    println!("ENOB {} bits", report.enob_bits);
    Ok(())
}

fn budget(geom: &SensorGeometry, out: &Path) -> CmdResult {
    let report = budget_report(geom)?;
    prepare_out(out)?;
    let json = to_json(&report)?;
    write_file(&out.join("budget.json"), json.as_bytes())?;
    RunManifest {
        command: "budget",
        config_source: "flags".into(),
        seed: None,
        output_dir: out,
        artifacts: vec!["budget.json"],
        config_json: None,
    }
    .write()?;
    print!("{json}");
    Ok(())
}

fn sweep(common: &Common, axis: &str, values: &[f64], seeds: u64, points: usize) -> CmdResult {
    let axis = Axis::parse(axis)?;
    let cfg = common.load()?;
    if values.is_empty() {
        return Err(AdcError::Domain("no sweep values".into()).into());
    }
    prepare_out(&common.out)?;
    let rows = run_sweep(&cfg, axis, values, seeds, points)?;
    write_file(&common.out.join("sweep.csv"), &csv_bytes(|b| write_sweep_csv(&rows, b))?)?;
    manifest(common, &cfg, "sweep", vec!["sweep.csv"])?;
    for r in &rows {
        println!(
            "value {} seed {}: DNL {:.4} INL {:.4} SNDR {:.3} dB ENOB {:.3}",
            r.value, r.seed, r.worst_dnl, r.worst_inl, r.sndr_db, r.enob
        );
    }
    Ok(())
}
