//! Readout throughput arithmetic for a column-parallel image sensor.

use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};

/// Per-channel conversion rate the original design targeted, samples/s.
pub const STATED_TARGET_RATE: f64 = 80e6;
/// Frame rate quoted alongside it.
pub const STATED_FRAME_RATE: f64 = 2500.0;
/// Frame time quoted alongside it, seconds.
pub const STATED_FRAME_TIME_S: f64 = 400e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub rows: u32,
    pub cols: u32,
    pub adc_channels: u32,
    pub pixel_time_s: f64,
}

impl Default for SensorGeometry {
    fn default() -> Self {
        Self {
            rows: 64,
            cols: 64,
            adc_channels: 1,
            pixel_time_s: 100e-9,
        }
    }
}

impl SensorGeometry {
    pub fn validate(&self) -> Result<()> {
        let fields = [("rows", self.rows), ("cols", self.cols), ("adc_channels", self.adc_channels)];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(AdcError::config(*name, "must be positive"));
        }
        if !(self.pixel_time_s > 0.0) || !self.pixel_time_s.is_finite() {
            return Err(AdcError::config("pixel_time_s", "must be finite and positive"));
        }
        if self.adc_channels > self.cols {
            return Err(AdcError::config("adc_channels", "cannot exceed the column count"));
        }
        Ok(())
    }

    pub fn total_pixels(&self) -> u64 {
        u64::from(self.rows) * u64::from(self.cols)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameTiming {
    pub frame_time_s: f64,
    pub frames_per_s: f64,
}

impl FrameTiming {
    fn from_time(frame_time_s: f64) -> Self {
        Self {
            frame_time_s,
            frames_per_s: 1.0 / frame_time_s,
        }
    }
}

/// Frame timing with every pixel through one converter, and with the
/// channels converting in parallel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBudget {
    pub serialized: FrameTiming,
    pub parallel: FrameTiming,
}

pub fn frame_budget(geom: &SensorGeometry) -> Result<FrameBudget> {
    geom.validate()?;
    let total = geom.total_pixels() as f64;
    Ok(FrameBudget {
        serialized: FrameTiming::from_time(total * geom.pixel_time_s),
        parallel: FrameTiming::from_time(total / f64::from(geom.adc_channels) * geom.pixel_time_s),
    })
}

/// Samples per second each channel must convert to sustain `target_fps`.
pub fn required_adc_rate(geom: &SensorGeometry, target_fps: f64) -> Result<f64> {
    if geom.adc_channels == 0 {
        return Err(AdcError::config("adc_channels", "must be positive"));
    }
    if !(target_fps > 0.0) || !target_fps.is_finite() {
        return Err(AdcError::domain("target frame rate must be finite and positive"));
    }
    Ok(geom.total_pixels() as f64 / f64::from(geom.adc_channels) * target_fps)
}

/// Full budget report with the quoted figures alongside the derived ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub geometry: SensorGeometry,
    pub budget: FrameBudget,
    pub stated_frame_time_s: f64,
    pub stated_frames_per_s: f64,
    pub stated_target_rate: f64,
    /// Per-channel rate needed for the quoted frame rate.
    pub required_rate_at_stated_fps: f64,
    /// Single-converter rate implied by the pixel time.
    pub pixel_rate: f64,
    pub flags: Vec<String>,
}

pub fn budget_report(geom: &SensorGeometry) -> Result<BudgetReport> {
    let budget = frame_budget(geom)?;
    let required = required_adc_rate(geom, STATED_FRAME_RATE)?;
    let pixel_rate = 1.0 / geom.pixel_time_s;
    let mut flags = Vec::new();
    let close = |a: f64, b: f64| (a - b).abs() <= 0.05 * b;
    if !close(required, STATED_TARGET_RATE) && !close(pixel_rate, STATED_TARGET_RATE) {
        flags.push(format!(
            "stated target {:.0} samples/s matches neither the per-channel rate for {} fps ({:.0} samples/s) \
             nor the pixel-time rate ({:.0} samples/s)",
            STATED_TARGET_RATE, STATED_FRAME_RATE, required, pixel_rate
        ));
    }
    if !close(budget.serialized.frame_time_s, STATED_FRAME_TIME_S) && !close(budget.parallel.frame_time_s, STATED_FRAME_TIME_S) {
        flags.push(format!(
            "stated frame time {STATED_FRAME_TIME_S} s is not within 5% of either derived frame time"
        ));
    }
    Ok(BudgetReport {
        geometry: *geom,
        budget,
        stated_frame_time_s: STATED_FRAME_TIME_S,
        stated_frames_per_s: STATED_FRAME_RATE,
        stated_target_rate: STATED_TARGET_RATE,
        required_rate_at_stated_fps: required,
        pixel_rate,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom(rows: u32, cols: u32, ch: u32, t: f64) -> SensorGeometry {
        SensorGeometry {
            rows,
            cols,
            adc_channels: ch,
            pixel_time_s: t,
        }
    }

    #[test]
    fn frame_examples() {
        let b = frame_budget(&geom(64, 64, 1, 100e-9)).unwrap();
        assert_relative_eq!(b.serialized.frame_time_s, 409.6e-6, max_relative = 1e-12);
        assert!((b.serialized.frames_per_s - 2441.406).abs() < 1e-3);

        let b = frame_budget(&geom(64, 64, 64, 100e-9)).unwrap();
        assert_relative_eq!(b.parallel.frame_time_s, 6.4e-6, max_relative = 1e-12);
        assert_relative_eq!(b.serialized.frame_time_s, 64.0 * b.parallel.frame_time_s, max_relative = 1e-15);

        let b = frame_budget(&geom(1, 1, 1, 1.0)).unwrap();
        assert_eq!(b.serialized, FrameTiming { frame_time_s: 1.0, frames_per_s: 1.0 });
    }

    #[test]
    fn rate_examples() {
        assert_relative_eq!(required_adc_rate(&geom(64, 64, 64, 100e-9), 2500.0).unwrap(), 160_000.0);
        let fps = 1.0 / 409.6e-6;
        assert_relative_eq!(required_adc_rate(&geom(64, 64, 1, 100e-9), fps).unwrap(), 10e6, max_relative = 1e-12);
        assert_eq!(required_adc_rate(&geom(1, 1, 1, 1.0), 10.0).unwrap(), 10.0);
        let g = geom(64, 64, 8, 1e-7);
        let r1 = required_adc_rate(&g, 100.0).unwrap();
        let r3 = required_adc_rate(&g, 300.0).unwrap();
        assert_relative_eq!(r3, 3.0 * r1);
    }

    #[test]
    fn validation() {
        assert!(frame_budget(&geom(0, 64, 1, 1e-7)).is_err());
        assert!(frame_budget(&geom(64, 64, 65, 1e-7)).is_err());
        assert!(frame_budget(&geom(64, 64, 1, 0.0)).is_err());
        assert!(required_adc_rate(&geom(64, 64, 0, 1e-7), 1.0).is_err());
        assert!(required_adc_rate(&geom(64, 64, 1, 1e-7), 0.0).is_err());
    }

    #[test]
    fn default_report_flags_rate_mismatch() {
        let r = budget_report(&SensorGeometry::default()).unwrap();
        assert_eq!(r.flags.len(), 1, "{:?}", r.flags);
        assert!(r.flags[0].contains("80000000"));
        assert!((r.budget.serialized.frame_time_s - 400e-6).abs() / 400e-6 < 0.05);
        assert!((r.budget.serialized.frames_per_s - 2500.0).abs() / 2500.0 < 0.05);
    }
}
