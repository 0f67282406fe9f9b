//! Converter configuration, JSON loading and named presets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};
use crate::impairments::{NoiseSpec, StageParams};
use crate::stage::ReferencePair;

/// Figures carried through to reports unchanged. Nothing is computed from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportedFigures {
    pub total_power_mw: f64,
    pub opamp_power_mw: f64,
    pub opamp_bias_current_a: f64,
}

impl ReportedFigures {
    pub fn published() -> Self {
        Self {
            total_power_mw: 75.47,
            opamp_power_mw: 10.825,
            opamp_bias_current_a: 2.5e-6,
        }
    }
}

/// Full description of a converter instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdcConfig {
    pub resolution: u32,
    #[serde(default)]
    pub refs: ReferencePair,
    /// Conversion rate, samples per second.
    pub clock_hz: f64,
    pub stages: Vec<StageParams>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported: Option<ReportedFigures>,
}

/// Largest supported resolution; codes are held in `u32`.
pub const MAX_RESOLUTION: u32 = 24;

impl AdcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 1 || self.resolution > MAX_RESOLUTION {
            return Err(AdcError::config(
                "resolution",
                format!("must be in 1..={MAX_RESOLUTION}, got {}", self.resolution),
            ));
        }
        self.refs.validate()?;
        if !(self.clock_hz > 0.0) || !self.clock_hz.is_finite() {
            return Err(AdcError::config("clock_hz", "must be finite and > 0"));
        }
        if self.stages.len() != self.resolution as usize {
            return Err(AdcError::config(
                "stages",
                format!(
                    "expected {} entries (one per bit of resolution), found {}",
                    self.resolution,
                    self.stages.len()
                ),
            ));
        }
        for (i, st) in self.stages.iter().enumerate() {
            st.validate_at(&format!("stages[{i}]"))?;
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: AdcConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| AdcError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn codes(&self) -> u32 {
        1u32 << self.resolution
    }

    pub fn lsb(&self) -> f64 {
        self.refs.full_scale() / f64::from(self.codes())
    }

    /// Half a conversion period: the time each phase gets to settle.
    pub fn settle_time_s(&self) -> f64 {
        0.5 / self.clock_hz
    }

    /// True when no stage injects random noise.
    pub fn is_noiseless(&self) -> bool {
        self.stages.iter().all(|s| match s.noise {
            NoiseSpec::Off => true,
            NoiseSpec::Sigma(v) => v == 0.0,
            NoiseSpec::AutoKtc => false,
        })
    }

    /// Ideal converter of the given resolution at ±1 V, 20 Msamples/s.
    pub fn ideal(resolution: u32) -> Self {
        Self {
            resolution,
            refs: ReferencePair::default(),
            clock_hz: 20e6,
            stages: vec![StageParams::neutral(); resolution as usize],
            seed: 0,
            reported: None,
        }
    }

    pub fn map_stages(mut self, f: impl Fn(&mut StageParams)) -> Self {
        self.stages.iter_mut().for_each(f);
        self
    }

    /// Overwrite every stage's offset and capacitor mismatch with draws from
    /// zero-mean Gaussians. Deterministic in `seed`.
    pub fn draw_mismatch(&mut self, offset_sigma_v: f64, cap_mismatch_sigma: f64, seed: u64) -> Result<()> {
        let offset = Normal::new(0.0, offset_sigma_v)
            .map_err(|e| AdcError::domain(format!("offset sigma: {e}")))?;
        let cap = Normal::new(0.0, cap_mismatch_sigma)
            .map_err(|e| AdcError::domain(format!("mismatch sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Keep clear of the per-sample noise streams.
        rng.set_stream(u64::MAX);
        for st in &mut self.stages {
            st.offset_v = offset.sample(&mut rng);
            st.cap_mismatch = cap.sample(&mut rng);
        }
        Ok(())
    }

    /// Redraw only the comparator offsets, leaving capacitor ratios alone.
    pub fn draw_offsets(&mut self, sigma_v: f64, seed: u64) -> Result<()> {
        let vals = draw_normals(sigma_v, seed, u64::MAX - 1, self.stages.len())?;
        self.stages.iter_mut().zip(vals).for_each(|(s, v)| s.offset_v = v);
        Ok(())
    }

    /// Redraw only the capacitor mismatches.
    pub fn draw_cap_mismatch(&mut self, sigma: f64, seed: u64) -> Result<()> {
        let vals = draw_normals(sigma, seed, u64::MAX - 2, self.stages.len())?;
        self.stages.iter_mut().zip(vals).for_each(|(s, v)| s.cap_mismatch = v);
        Ok(())
    }
}

fn draw_normals(sigma: f64, seed: u64, stream: u64, n: usize) -> Result<Vec<f64>> {
    let dist = Normal::new(0.0, sigma).map_err(|e| AdcError::domain(format!("sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}

/// Seed committed with the paper-like preset.
pub const PAPER_LIKE_SEED: u64 = 20_070_601;

/// Calibrated knobs of the paper-like preset.
pub mod paper_like {
    pub const OPEN_LOOP_GAIN_DB: f64 = 55.0;
    pub const GBW_HZ: f64 = 800e6;
    pub const LOAD_CAP_F: f64 = 0.1e-12;
    pub const OFFSET_SIGMA_V: f64 = 2e-3;
    pub const CAP_MISMATCH_SIGMA: f64 = 1e-3;
    /// Lumped residue noise per stage. kT/C of the load alone (about
    /// 0.2 mV) leaves SNDR near 48.4 dB; this value centers it near 44.8 dB.
    pub const RESIDUE_NOISE_SIGMA_V: f64 = 5.5e-3;
    pub const CLOCK_HZ: f64 = 20e6;
}

/// Named starting configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Ideal,
    PaperLike,
    /// Finite 55 dB op-amp gain, everything else neutral.
    FiniteGain,
    /// First-stage capacitor mismatch large enough to lose codes at mid-scale.
    MissingCode,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Ideal, Preset::PaperLike, Preset::FiniteGain, Preset::MissingCode];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Ideal => "ideal",
            Preset::PaperLike => "paper-like",
            Preset::FiniteGain => "finite-gain",
            Preset::MissingCode => "missing-code",
        }
    }

    pub fn config(self) -> AdcConfig {
        match self {
            Preset::Ideal => AdcConfig::ideal(8),
            Preset::FiniteGain => AdcConfig::ideal(8).map_stages(|s| s.open_loop_gain_db = Some(55.0)),
            Preset::MissingCode => {
                let mut cfg = AdcConfig::ideal(8);
                cfg.stages[0].cap_mismatch = -0.02;
                cfg
            }
            Preset::PaperLike => {
                use paper_like::*;
                let mut cfg = AdcConfig::ideal(8).map_stages(|s| {
                    s.open_loop_gain_db = Some(OPEN_LOOP_GAIN_DB);
                    s.gbw_hz = Some(GBW_HZ);
                    s.load_cap_f = LOAD_CAP_F;
                    s.noise = NoiseSpec::Sigma(RESIDUE_NOISE_SIGMA_V);
                });
                cfg.clock_hz = CLOCK_HZ;
                cfg.seed = PAPER_LIKE_SEED;
                cfg.reported = Some(ReportedFigures::published());
                cfg.draw_mismatch(OFFSET_SIGMA_V, CAP_MISMATCH_SIGMA, PAPER_LIKE_SEED)
                    .expect("preset sigmas are valid");
                cfg
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = AdcError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                AdcError::config("preset", format!("unknown preset `{s}`; expected one of {}", names.join(", ")))
            })
    }
}
