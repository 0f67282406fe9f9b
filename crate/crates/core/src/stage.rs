//! Per-stage math: comparator decision against the midpoint threshold and
//! the multiply-by-two residue.

use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};
use crate::impairments::{residue_mismatch, saturate, StageModel};
use crate::noise::NoiseSource;

/// Positive and negative converter references.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePair {
    pub vrefp: f64,
    pub vrefn: f64,
}

impl Default for ReferencePair {
    fn default() -> Self {
        Self {
            vrefp: 1.0,
            vrefn: -1.0,
        }
    }
}

impl ReferencePair {
    pub fn new(vrefp: f64, vrefn: f64) -> Result<Self> {
        let refs = Self { vrefp, vrefn };
        refs.validate()?;
        Ok(refs)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.vrefp.is_finite() || !self.vrefn.is_finite() {
            return Err(AdcError::config("refs", "references must be finite"));
        }
        if self.vrefp <= self.vrefn {
            return Err(AdcError::config("refs", "vrefp must exceed vrefn"));
        }
        Ok(())
    }

    /// Comparator threshold, midway between the references.
    pub fn threshold(&self) -> f64 {
        0.5 * (self.vrefp + self.vrefn)
    }

    pub fn full_scale(&self) -> f64 {
        self.vrefp - self.vrefn
    }

    /// Reference the sampling capacitor is switched to for a given bit.
    pub fn for_bit(&self, bit: u8) -> f64 {
        if bit == 1 {
            self.vrefp
        } else {
            self.vrefn
        }
    }
}

/// Output of one stage: its decided bit and the residue handed on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageDecision {
    pub bit: u8,
    pub residue: f64,
}

/// Comparator decision with an input-referred offset. A tie resolves to 1.
pub fn compare(vin: f64, vth: f64, offset: f64) -> Result<u8> {
    if !(vin.is_finite() && vth.is_finite() && offset.is_finite()) {
        return Err(AdcError::domain(format!(
            "compare inputs must be finite (vin={vin}, vth={vth}, offset={offset})"
        )));
    }
    Ok(u8::from(vin - offset >= vth))
}

/// Ideal residue `2·vin − vref(bit)`, unclamped.
pub fn residue_ideal(vin: f64, bit: u8, refs: &ReferencePair) -> Result<f64> {
    check_bit(bit)?;
    Ok(2.0 * vin - refs.for_bit(bit))
}

pub(crate) fn check_bit(bit: u8) -> Result<()> {
    if bit > 1 {
        return Err(AdcError::domain(format!("bit must be 0 or 1, got {bit}")));
    }
    Ok(())
}

/// One full stage: decision, then the non-ideal residue.
///
/// Gain error and settling scale the mismatched residue, noise is added
/// next, and the op-amp rails clamp last.
pub fn stage_transfer<N: NoiseSource + ?Sized>(
    vin: f64,
    model: &StageModel,
    refs: &ReferencePair,
    noise: &mut N,
) -> Result<StageDecision> {
    let bit = compare(vin, refs.threshold(), model.offset)?;
    let amplified = model.gain_error * model.settling * residue_mismatch(vin, bit, refs, model.cap_mismatch)?;
    let noisy = if model.noise_sigma > 0.0 {
        amplified + model.noise_sigma * noise.next_gaussian()
    } else {
        amplified
    };
    Ok(StageDecision {
        bit,
        residue: saturate(noisy, &model.rails),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impairments::{NoiseSpec, StageParams};
    use crate::noise::Silent;

    fn refs() -> ReferencePair {
        ReferencePair::default()
    }

    fn model(params: StageParams) -> StageModel {
        params.model(0.5 / 20e6, 300.0).unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(0.5, 0.0, 0.0).unwrap(), 1);
        assert_eq!(compare(-0.5, 0.0, 0.0).unwrap(), 0);
        assert_eq!(compare(0.0, 0.0, 0.0).unwrap(), 1);
        assert_eq!(compare(0.05, 0.0, 0.1).unwrap(), 0);
        assert!(compare(f64::NAN, 0.0, 0.0).is_err());
        assert!(compare(0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn residue_examples() {
        let r = refs();
        assert_eq!(residue_ideal(0.5, 1, &r).unwrap(), 0.0);
        assert_eq!(residue_ideal(0.0, 1, &r).unwrap(), -1.0);
        assert_eq!(residue_ideal(-0.5, 0, &r).unwrap(), 0.0);
        assert_eq!(residue_ideal(1.0, 1, &r).unwrap(), 1.0);
        assert!(residue_ideal(0.0, 2, &r).is_err());
    }

    #[test]
    fn reference_pair_rejects_inverted() {
        assert!(ReferencePair::new(-1.0, 1.0).is_err());
        assert!(ReferencePair::new(1.0, 1.0).is_err());
        let r = ReferencePair::new(2.5, 0.5).unwrap();
        assert_eq!(r.threshold(), 1.5);
        assert_eq!(r.full_scale(), 2.0);
    }

    #[test]
    fn transfer_neutral_is_ideal() {
        let m = model(StageParams::neutral());
        let d = stage_transfer(0.5, &m, &refs(), &mut Silent).unwrap();
        assert_eq!(d, StageDecision { bit: 1, residue: 0.0 });
    }

    #[test]
    fn transfer_with_negative_offset() {
        // 0.5 - (-0.6) = 1.1 >= 0, so the decision stays 1.
        let m = model(StageParams {
            offset_v: -0.6,
            ..StageParams::neutral()
        });
        let d = stage_transfer(0.5, &m, &refs(), &mut Silent).unwrap();
        assert_eq!(d, StageDecision { bit: 1, residue: 0.0 });

        // A positive offset large enough to flip the decision lets the
        // residue leave the reference range; wide rails keep it.
        let m = model(StageParams {
            offset_v: 0.6,
            ..StageParams::neutral()
        });
        let d = stage_transfer(0.5, &m, &refs(), &mut Silent).unwrap();
        assert_eq!(d, StageDecision { bit: 0, residue: 2.0 });
    }

    #[test]
    fn transfer_finite_gain() {
        let m = model(StageParams {
            open_loop_gain_db: Some(55.0),
            ..StageParams::neutral()
        });
        let d = stage_transfer(0.5, &m, &refs(), &mut Silent).unwrap();
        assert_eq!(d.bit, 1);
        assert!(d.residue.abs() < 1e-15);
        let d = stage_transfer(0.75, &m, &refs(), &mut Silent).unwrap();
        // 0.5 ideal residue scaled by 1/(1 + 2/562.341...)
        assert!((d.residue - 0.5 * 0.996_456_5).abs() < 1e-6);
    }

    #[test]
    fn transfer_saturates_at_rails() {
        let m = model(StageParams {
            offset_v: 0.6,
            rail_pos: 1.5,
            rail_neg: -1.5,
            ..StageParams::neutral()
        });
        let d = stage_transfer(0.5, &m, &refs(), &mut Silent).unwrap();
        assert_eq!(d.residue, 1.5);
    }

    #[test]
    fn transfer_adds_noise() {
        struct Fixed(f64);
        impl NoiseSource for Fixed {
            fn next_gaussian(&mut self) -> f64 {
                self.0
            }
        }
        let m = model(StageParams {
            noise: NoiseSpec::Sigma(1e-3),
            ..StageParams::neutral()
        });
        let d = stage_transfer(0.5, &m, &refs(), &mut Fixed(2.0)).unwrap();
        assert_eq!(d.residue, 2e-3);
    }

    #[test]
    fn residue_containment_grid() {
        let r = refs();
        let n = 10_000;
        for i in 0..=n {
            let vin = r.vrefn + r.full_scale() * i as f64 / n as f64;
            let bit = compare(vin, r.threshold(), 0.0).unwrap();
            let res = residue_ideal(vin, bit, &r).unwrap();
            assert!((r.vrefn..=r.vrefp).contains(&res), "vin={vin} res={res}");
        }
    }

    #[test]
    fn jump_at_threshold_is_full_scale() {
        let r = refs();
        let below = residue_ideal(r.threshold(), 0, &r).unwrap();
        let at = residue_ideal(r.threshold(), 1, &r).unwrap();
        assert_eq!(below - at, r.full_scale());
    }

    proptest::proptest! {
        #[test]
        fn slope_is_two_on_each_side(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let r = refs();
            let ba = compare(a, 0.0, 0.0).unwrap();
            let bb = compare(b, 0.0, 0.0).unwrap();
            proptest::prop_assume!(ba == bb && (a - b).abs() > 1e-6);
            let ra = residue_ideal(a, ba, &r).unwrap();
            let rb = residue_ideal(b, bb, &r).unwrap();
            proptest::prop_assert!(((ra - rb) / (a - b) - 2.0).abs() < 1e-9);
        }

        #[test]
        fn neutral_transfer_matches_ideal_bitwise(vin in -1.5f64..1.5) {
            let r = refs();
            let m = model(StageParams::neutral());
            let d = stage_transfer(vin, &m, &r, &mut Silent).unwrap();
            let bit = compare(vin, r.threshold(), 0.0).unwrap();
            proptest::prop_assert_eq!(d.bit, bit);
            proptest::prop_assert_eq!(d.residue.to_bits(), residue_ideal(vin, bit, &r).unwrap().to_bits());
        }
    }
}
