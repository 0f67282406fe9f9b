//! Behavioral non-idealities of a switched-capacitor stage.
//!
//! Every model has an exact neutral element, so a stage with
//! [`StageParams::neutral`] reproduces the ideal residue bit for bit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};
use crate::stage::{check_bit, ReferencePair};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Temperature used for automatic kT/C noise.
pub const NOISE_TEMPERATURE_K: f64 = 300.0;

/// Residue noise setting for a stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSpec {
    #[default]
    Off,
    /// Fixed standard deviation in volts.
    #[serde(rename = "sigma_v")]
    Sigma(f64),
    /// `sqrt(kT/C)` of the stage load capacitance at 300 K.
    AutoKtc,
}

/// Op-amp output swing limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rails {
    pub hi: f64,
    pub lo: f64,
}

impl Rails {
    pub fn new(hi: f64, lo: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(AdcError::domain(format!("rails need hi > lo (hi={hi}, lo={lo})")));
        }
        Ok(Self { hi, lo })
    }
}

/// Non-ideality parameters of one stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageParams {
    /// Comparator input-referred offset, volts.
    #[serde(default)]
    pub offset_v: f64,
    /// Op-amp open-loop gain in dB; `None` means infinite.
    #[serde(default)]
    pub open_loop_gain_db: Option<f64>,
    /// `C1/C2 = 1 + cap_mismatch`.
    #[serde(default)]
    pub cap_mismatch: f64,
    /// Gain-bandwidth product in Hz; `None` means complete settling.
    #[serde(default)]
    pub gbw_hz: Option<f64>,
    #[serde(default = "default_load_cap")]
    pub load_cap_f: f64,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default = "default_rail_pos")]
    pub rail_pos: f64,
    #[serde(default = "default_rail_neg")]
    pub rail_neg: f64,
}

fn default_load_cap() -> f64 {
    0.1e-12
}

fn default_rail_pos() -> f64 {
    5.0
}

fn default_rail_neg() -> f64 {
    -5.0
}

impl Default for StageParams {
    fn default() -> Self {
        Self::neutral()
    }
}

impl StageParams {
    /// All impairments at their neutral value, ±5 V rails.
    pub fn neutral() -> Self {
        Self {
            offset_v: 0.0,
            open_loop_gain_db: None,
            cap_mismatch: 0.0,
            gbw_hz: None,
            load_cap_f: default_load_cap(),
            noise: NoiseSpec::Off,
            rail_pos: default_rail_pos(),
            rail_neg: default_rail_neg(),
        }
    }

    /// Check field invariants. `field` prefixes the reported field path.
    pub fn validate_at(&self, field: &str) -> Result<()> {
        let bad = |name: &str, reason: &str| Err(AdcError::config(format!("{field}.{name}"), reason));
        if !self.offset_v.is_finite() {
            return bad("offset_v", "must be finite");
        }
        if let Some(db) = self.open_loop_gain_db {
            if !(db > 0.0) {
                return bad("open_loop_gain_db", "must be > 0 dB (omit for infinite gain)");
            }
        }
        if !(self.cap_mismatch > -1.0) || !self.cap_mismatch.is_finite() {
            return bad("cap_mismatch", "must be finite and > -1");
        }
        if let Some(gbw) = self.gbw_hz {
            if !(gbw > 0.0) {
                return bad("gbw_hz", "must be > 0 (omit for complete settling)");
            }
        }
        if !(self.load_cap_f > 0.0) || !self.load_cap_f.is_finite() {
            return bad("load_cap_f", "must be finite and > 0");
        }
        if let NoiseSpec::Sigma(s) = self.noise {
            if !(s >= 0.0) || !s.is_finite() {
                return bad("noise", "sigma_v must be finite and >= 0");
            }
        }
        if !(self.rail_pos > self.rail_neg) {
            return bad("rail_pos", "must exceed rail_neg");
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_at("stage")
    }

    /// Resolve the parameters into the per-conversion factors used by
    /// [`crate::stage::stage_transfer`].
    pub fn model(&self, settle_time_s: f64, temp_k: f64) -> Result<StageModel> {
        self.validate()?;
        let ratio = 1.0 + self.cap_mismatch;
        let gain_db = self.open_loop_gain_db.unwrap_or(f64::INFINITY);
        let gain_error = closed_loop_gain(gain_db, ratio)? / (1.0 + ratio);
        let settling = match self.gbw_hz {
            Some(gbw) => settling_factor(gbw, 1.0 / (1.0 + ratio), settle_time_s)?,
            None => 1.0,
        };
        let noise_sigma = match self.noise {
            NoiseSpec::Off => 0.0,
            NoiseSpec::Sigma(s) => s,
            NoiseSpec::AutoKtc => ktc_noise_sigma(self.load_cap_f, temp_k)?,
        };
        Ok(StageModel {
            offset: self.offset_v,
            gain_error,
            cap_mismatch: self.cap_mismatch,
            settling,
            noise_sigma,
            rails: Rails::new(self.rail_pos, self.rail_neg)?,
        })
    }
}

/// Per-conversion factors of a stage, precomputed from [`StageParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct StageModel {
    pub offset: f64,
    /// Closed-loop gain normalized to its infinite-gain value.
    pub gain_error: f64,
    pub cap_mismatch: f64,
    pub settling: f64,
    pub noise_sigma: f64,
    pub rails: Rails,
}

/// Closed-loop gain `(1 + r) / (1 + (1 + r)/A)` of the residue amplifier,
/// with `A = 10^(dB/20)` and `r = C1/C2`. Infinite dB gives `1 + r`.
pub fn closed_loop_gain(open_loop_gain_db: f64, c1_over_c2: f64) -> Result<f64> {
    if open_loop_gain_db.is_nan() || !(c1_over_c2 > 0.0) {
        return Err(AdcError::domain("closed_loop_gain needs a gain and a positive capacitor ratio"));
    }
    let ideal = 1.0 + c1_over_c2;
    if open_loop_gain_db == f64::INFINITY {
        return Ok(ideal);
    }
    let a = 10f64.powf(open_loop_gain_db / 20.0);
    if !(a > 0.0) || open_loop_gain_db <= 0.0 {
        return Err(AdcError::domain(format!(
            "open-loop gain must be positive, got {open_loop_gain_db} dB"
        )));
    }
    Ok(ideal / (1.0 + ideal / a))
}

/// Fraction of the final value reached after `settle_time_s` of
/// single-pole settling with `tau = 1/(2π·β·GBW)`.
pub fn settling_factor(gbw_hz: f64, feedback_factor: f64, settle_time_s: f64) -> Result<f64> {
    if !(gbw_hz > 0.0) || !(feedback_factor > 0.0 && feedback_factor <= 1.0) || !(settle_time_s > 0.0) {
        return Err(AdcError::domain(format!(
            "settling needs gbw > 0, feedback in (0,1], time > 0 (got {gbw_hz}, {feedback_factor}, {settle_time_s})"
        )));
    }
    let tau = 1.0 / (2.0 * PI * feedback_factor * gbw_hz);
    Ok(1.0 - (-settle_time_s / tau).exp())
}

/// Thermal noise `sqrt(kT/C)` sampled on a capacitor.
pub fn ktc_noise_sigma(cap_f: f64, temp_k: f64) -> Result<f64> {
    if !(cap_f > 0.0) || !(temp_k > 0.0) {
        return Err(AdcError::domain("kT/C noise needs positive capacitance and temperature"));
    }
    Ok((BOLTZMANN * temp_k / cap_f).sqrt())
}

pub fn saturate(v: f64, rails: &Rails) -> f64 {
    v.clamp(rails.lo, rails.hi)
}

/// Residue with `C1/C2 = 1 + delta`: `(2 + delta)·vin − (1 + delta)·vref(bit)`.
pub fn residue_mismatch(vin: f64, bit: u8, refs: &ReferencePair, delta: f64) -> Result<f64> {
    check_bit(bit)?;
    if !(delta > -1.0) {
        return Err(AdcError::domain(format!("capacitor mismatch must exceed -1, got {delta}")));
    }
    let ratio = 1.0 + delta;
    Ok((1.0 + ratio) * vin - ratio * refs.for_bit(bit))
}
