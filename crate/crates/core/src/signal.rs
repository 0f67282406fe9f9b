//! Test stimuli.

use std::f64::consts::PI;
use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StimulusKind {
    Ramp { n: usize, vlo: f64, vhi: f64 },
    CoherentSine { nfft: usize, j_bin: usize, amplitude: f64, offset: f64 },
    DcLevels { levels: usize, repeats: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stimulus {
    pub samples: Vec<f64>,
    pub kind: StimulusKind,
}

impl Stimulus {
    /// CSV with columns `index,voltage`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "voltage"])?;
        for (i, v) in self.samples.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|source| AdcError::Io {
            path: "<stimulus csv>".into(),
            source,
        })?;
        Ok(())
    }
}

/// `n` equally spaced points from `vlo` to `vhi`, both included.
pub fn gen_ramp(n: usize, vlo: f64, vhi: f64) -> Result<Stimulus> {
    if n < 2 {
        return Err(AdcError::domain(format!("ramp needs at least 2 points, got {n}")));
    }
    if !(vhi > vlo) || !vlo.is_finite() || !vhi.is_finite() {
        return Err(AdcError::domain(format!("ramp needs finite vhi > vlo (got {vlo}, {vhi})")));
    }
    let last = (n - 1) as f64;
    let samples = (0..n)
        .map(|i| {
            if i == n - 1 {
                vhi
            } else {
                vlo + (vhi - vlo) * (i as f64 / last)
            }
        })
        .collect();
    Ok(Stimulus {
        samples,
        kind: StimulusKind::Ramp { n, vlo, vhi },
    })
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Sine with exactly `j_bin` periods in an `nfft`-sample record.
pub fn gen_coherent_sine(nfft: usize, j_bin: usize, amplitude: f64, offset: f64) -> Result<Stimulus> {
    if !nfft.is_power_of_two() || nfft < 4 {
        return Err(AdcError::domain(format!("record length must be a power of two >= 4, got {nfft}")));
    }
    if j_bin == 0 || j_bin >= nfft / 2 {
        return Err(AdcError::domain(format!(
            "signal bin must lie in 1..{} (got {j_bin})",
            nfft / 2
        )));
    }
    if !amplitude.is_finite() || !offset.is_finite() {
        return Err(AdcError::domain("amplitude and offset must be finite"));
    }
    if gcd(j_bin, nfft) != 1 {
        warn!("bin {j_bin} shares a factor with {nfft}; the record repeats and quantization error is not spread");
    }
    let n = nfft as f64;
    let samples = (0..nfft)
        .map(|k| {
            // Reduce the phase index modulo nfft to keep the argument small.
            let phase = (j_bin * k) % nfft;
            offset + amplitude * (2.0 * PI * phase as f64 / n).sin()
        })
        .collect();
    Ok(Stimulus {
        samples,
        kind: StimulusKind::CoherentSine {
            nfft,
            j_bin,
            amplitude,
            offset,
        },
    })
}

pub fn gen_dc_levels(levels: &[f64], repeats: usize) -> Result<Stimulus> {
    if levels.is_empty() {
        return Err(AdcError::domain("no DC levels given"));
    }
    if repeats < 1 {
        return Err(AdcError::domain("repeats must be at least 1"));
    }
    if levels.iter().any(|v| !v.is_finite()) {
        return Err(AdcError::domain("DC levels must be finite"));
    }
    let samples = levels
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, repeats))
        .collect();
    Ok(Stimulus {
        samples,
        kind: StimulusKind::DcLevels {
            levels: levels.len(),
            repeats,
        },
    })
}
