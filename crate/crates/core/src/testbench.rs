//! Standard measurements on a configured converter.

use serde::{Deserialize, Serialize};

use crate::config::AdcConfig;
use crate::error::{AdcError, Result};
use crate::metrology::{
    analyze_spectrum, histogram_linearity, linearity_from_transitions, transition_levels, LinearityReport,
    SpectrumReport,
};
use crate::pipeline::{run_stream, Converter};
use crate::signal::{gen_coherent_sine, gen_ramp};

/// Default FFT record length.
pub const DEFAULT_NFFT: usize = 1024;
/// Default coherent signal bin: odd, so coprime with any power-of-two record.
pub const DEFAULT_SIGNAL_BIN: usize = 479;
/// Default ramp length for code-density tests.
pub const DEFAULT_RAMP_POINTS: usize = 65_536;
/// Ramp overrange on each side, in LSB.
pub const RAMP_MARGIN_LSB: f64 = 2.0;
/// Bisection tolerance for transition search, in LSB.
pub const TRANSITION_TOL_LSB: f64 = 1e-6;

/// Code-density linearity from a ramp slightly wider than full scale,
/// converted through the clocked pipeline.
pub fn ramp_linearity(cfg: &AdcConfig, points: usize) -> Result<LinearityReport> {
    let margin = RAMP_MARGIN_LSB * cfg.lsb();
    let ramp = gen_ramp(points, cfg.refs.vrefn - margin, cfg.refs.vrefp + margin)?;
    let stream = run_stream(&ramp.samples, cfg)?;
    histogram_linearity(&stream.codes, cfg.resolution)
}

/// Transition-level linearity; requires a noiseless configuration.
pub fn transition_linearity(cfg: &AdcConfig) -> Result<LinearityReport> {
    if !cfg.is_noiseless() {
        return Err(AdcError::domain(
            "transition search needs a deterministic converter; disable stage noise",
        ));
    }
    let conv = Converter::new(cfg)?;
    let levels = transition_levels(
        |v| conv.convert_sample(v, 0),
        cfg.resolution,
        &cfg.refs,
        TRANSITION_TOL_LSB * cfg.lsb(),
    )?;
    if !levels.non_monotone.is_empty() {
        return Err(AdcError::domain(format!(
            "converter is not monotone (or loses codes) at codes {:?}",
            levels.non_monotone
        )));
    }
    linearity_from_transitions(&levels.levels)
}

/// Sine test options.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineTest {
    pub nfft: usize,
    pub signal_bin: usize,
    /// Peak amplitude as a fraction of half the full-scale range.
    pub amplitude_fs: f64,
    /// Analyze the analog stimulus itself, bypassing the converter.
    pub passthrough: bool,
}

impl Default for SineTest {
    fn default() -> Self {
        Self {
            nfft: DEFAULT_NFFT,
            signal_bin: DEFAULT_SIGNAL_BIN,
            amplitude_fs: 1.0,
            passthrough: false,
        }
    }
}

pub fn sine_spectrum(cfg: &AdcConfig, test: &SineTest) -> Result<SpectrumReport> {
    let amplitude = 0.5 * cfg.refs.full_scale() * test.amplitude_fs;
    let stim = gen_coherent_sine(test.nfft, test.signal_bin, amplitude, cfg.refs.threshold())?;
    let mut report = if test.passthrough {
        analyze_spectrum(&stim.samples, test.nfft, test.signal_bin)?
    } else {
        let stream = run_stream(&stim.samples, cfg)?;
        let codes: Vec<f64> = stream.codes.iter().map(|&c| f64::from(c)).collect();
        analyze_spectrum(&codes, test.nfft, test.signal_bin)?
    };
    let f_in = test.signal_bin as f64 / test.nfft as f64 * cfg.clock_hz;
    report.notes.push(format!(
        "coherent input at bin {} of {} ({} Hz at {} samples/s); a tone at exactly half the sample rate has no defined SNDR",
        test.signal_bin, test.nfft, f_in, cfg.clock_hz
    ));
    if test.passthrough {
        report.notes.push("quantization bypassed: stimulus analyzed directly".into());
    }
    Ok(report)
}

/// Summary figures used in sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figures {
    pub worst_dnl: f64,
    pub worst_inl: f64,
    pub sndr_db: f64,
    pub enob: f64,
}

pub fn figures(cfg: &AdcConfig, ramp_points: usize, sine: &SineTest) -> Result<Figures> {
    let lin = ramp_linearity(cfg, ramp_points)?;
    let spec = sine_spectrum(cfg, sine)?;
    Ok(Figures {
        worst_dnl: lin.worst_dnl,
        worst_inl: lin.worst_inl,
        sndr_db: spec.sndr_db,
        enob: spec.enob_bits,
    })
}
