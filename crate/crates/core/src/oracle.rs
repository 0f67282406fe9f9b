//! Reference converters used to check the simulator.
//!
//! Nothing here calls into `stage`, `impairments`, `noise` or `pipeline`:
//! the closed-form quantizer and the plain-loop evaluator are written out
//! directly from the circuit equations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::AdcConfig;
use crate::error::{AdcError, Result};
use crate::impairments::NoiseSpec;
use crate::stage::ReferencePair;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdealQuantizerSpec {
    pub resolution: u32,
    pub refs: ReferencePair,
}

impl IdealQuantizerSpec {
    pub fn new(resolution: u32, refs: ReferencePair) -> Result<Self> {
        if !(1..=24).contains(&resolution) {
            return Err(AdcError::domain(format!("resolution {resolution} outside 1..=24")));
        }
        refs.validate()?;
        Ok(Self { resolution, refs })
    }

    pub fn lsb(&self) -> f64 {
        (self.refs.vrefp - self.refs.vrefn) / f64::from(1u32 << self.resolution)
    }

    /// Input voltage at which code `k` begins.
    pub fn transition(&self, k: u32) -> f64 {
        self.refs.vrefn + f64::from(k) * self.lsb()
    }
}

/// `clamp(floor((vin - vrefn)/lsb), 0, 2^N - 1)`.
pub fn ideal_quantize(vin: f64, spec: &IdealQuantizerSpec) -> u32 {
    let top = (1u32 << spec.resolution) - 1;
    let x = ((vin - spec.refs.vrefn) / spec.lsb()).floor();
    if x.is_nan() || x < 0.0 {
        0
    } else if x >= f64::from(top) {
        top
    } else {
        x as u32
    }
}

/// Stage-by-stage evaluation of one conversion as a plain loop.
///
/// `sample` picks the same per-(sample, stage) noise streams the simulator
/// uses, so noisy runs can be compared draw for draw.
pub fn brute_force_convert(vin: f64, cfg: &AdcConfig, sample: u64) -> Result<u32> {
    if !vin.is_finite() {
        return Err(AdcError::domain("input must be finite"));
    }
    let refs = cfg.refs;
    let mid = 0.5 * (refs.vrefp + refs.vrefn);
    let half_period = 0.5 / cfg.clock_hz;
    let n = cfg.stages.len();
    let mut v = vin;
    let mut code = 0u32;
    for (i, st) in cfg.stages.iter().enumerate() {
        let d = if v - st.offset_v >= mid { 1u32 } else { 0u32 };
        code = code * 2 + d;
        if i == n - 1 {
            break;
        }
        let vref = if d == 1 { refs.vrefp } else { refs.vrefn };
        // C1/C2 = 1 + δ; the closed loop divides by 1 + (C1 + C2)/(C2·A).
        let c_ratio = 1.0 + st.cap_mismatch;
        let loop_loss = match st.open_loop_gain_db {
            Some(db) => {
                let a = 10f64.powf(db / 20.0);
                (1.0 + c_ratio) / (1.0 + (1.0 + c_ratio) / a) / (1.0 + c_ratio)
            }
            None => 1.0,
        };
        let settled = match st.gbw_hz {
            Some(gbw) => {
                let beta = 1.0 / (1.0 + c_ratio);
                1.0 - (-half_period * 2.0 * std::f64::consts::PI * beta * gbw).exp()
            }
            None => 1.0,
        };
        let mut out = loop_loss * settled * ((1.0 + c_ratio) * v - c_ratio * vref);
        let sigma = match st.noise {
            NoiseSpec::Off => 0.0,
            NoiseSpec::Sigma(s) => s,
            NoiseSpec::AutoKtc => (1.380_649e-23 * 300.0 / st.load_cap_f).sqrt(),
        };
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(sample);
            rng.set_word_pos((i as u128) << 32);
            let z: f64 = StandardNormal.sample(&mut rng);
            out += sigma * z;
        }
        v = out.max(st.rail_neg).min(st.rail_pos);
    }
    Ok(code)
}
