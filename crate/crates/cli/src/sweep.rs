//! Parameter sweeps over stage impairments.

use rayon::prelude::*;

use pipeadc::config::AdcConfig;
use pipeadc::impairments::NoiseSpec;
use pipeadc::report::SweepRow;
use pipeadc::testbench::{figures, SineTest};
use pipeadc::{AdcError, Result};

/// A stage parameter a sweep can vary. Mismatch axes are Monte-Carlo: the
/// value is a standard deviation and each seed draws its own stage set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    OpenLoopGainDb,
    GbwHz,
    LoadCapF,
    NoiseSigmaV,
    OffsetSigmaV,
    CapMismatchSigma,
}

impl Axis {
    pub const ALL: [(&'static str, Axis); 6] = [
        ("open_loop_gain_db", Axis::OpenLoopGainDb),
        ("gbw_hz", Axis::GbwHz),
        ("load_cap_f", Axis::LoadCapF),
        ("noise_sigma_v", Axis::NoiseSigmaV),
        ("offset_v", Axis::OffsetSigmaV),
        ("cap_mismatch", Axis::CapMismatchSigma),
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.iter().find(|(n, _)| *n == name).map(|&(_, a)| a).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|(n, _)| *n).collect();
            AdcError::Config {
                field: "axis".into(),
                reason: format!("unknown axis `{name}`; valid axes: {}", names.join(", ")),
            }
        })
    }

    fn apply(self, cfg: &mut AdcConfig, value: f64, seed: u64) -> Result<()> {
        match self {
            Axis::OpenLoopGainDb => cfg.stages.iter_mut().for_each(|s| s.open_loop_gain_db = Some(value)),
            Axis::GbwHz => cfg.stages.iter_mut().for_each(|s| s.gbw_hz = Some(value)),
            Axis::LoadCapF => cfg.stages.iter_mut().for_each(|s| s.load_cap_f = value),
            Axis::NoiseSigmaV => cfg.stages.iter_mut().for_each(|s| s.noise = NoiseSpec::Sigma(value)),
            Axis::OffsetSigmaV => cfg.draw_offsets(value, seed)?,
            Axis::CapMismatchSigma => cfg.draw_cap_mismatch(value, seed)?,
        }
        cfg.seed = seed;
        cfg.validate()
    }
}

pub fn run_sweep(base: &AdcConfig, axis: Axis, values: &[f64], seeds: u64, ramp_points: usize) -> Result<Vec<SweepRow>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AdcError::Domain("sweep values must be finite".into()));
    }
    let points: Vec<(usize, u64, f64)> = values
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| (0..seeds.max(1)).map(move |k| (i, base.seed.wrapping_add(k), v)))
        .collect();
    let sine = SineTest::default();
    let mut rows: Vec<(usize, SweepRow)> = points
        .par_iter()
        .map(|&(i, seed, value)| {
            let mut cfg = base.clone();
            axis.apply(&mut cfg, value, seed)?;
            let f = figures(&cfg, ramp_points, &sine)?;
            Ok((
                i,
                SweepRow {
                    value,
                    seed,
                    worst_dnl: f.worst_dnl,
                    worst_inl: f.worst_inl,
                    sndr_db: f.sndr_db,
                    enob: f.enob,
                },
            ))
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|(i, r)| (*i, r.seed));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_axis_lists_valid_ones() {
        let err = Axis::parse("bogus").unwrap_err().to_string();
        assert!(err.contains("open_loop_gain_db") && err.contains("cap_mismatch"), "{err}");
    }

    #[test]
    fn gain_axis_degrades_monotonically() {
        let rows = run_sweep(&AdcConfig::ideal(8), Axis::OpenLoopGainDb, &[43.0, 55.0, 67.0, 80.0], 1, 16_384).unwrap();
        assert!(rows.windows(2).all(|w| w[1].worst_inl <= w[0].worst_inl), "{rows:?}");
    }

    #[test]
    fn seeds_do_not_matter_without_noise() {
        let rows = run_sweep(&AdcConfig::ideal(8), Axis::OpenLoopGainDb, &[55.0], 2, 8_192).unwrap();
        assert_eq!(rows.len(), 2);
        assert_ne!(rows[0].seed, rows[1].seed);
        let strip = |r: &SweepRow| (r.worst_dnl, r.worst_inl, r.sndr_db, r.enob);
        assert_eq!(strip(&rows[0]), strip(&rows[1]));
    }

    #[test]
    fn offset_monte_carlo_trend() {
        let rows = run_sweep(&AdcConfig::ideal(8), Axis::OffsetSigmaV, &[0.0, 2e-3, 8e-3], 16, 16_384).unwrap();
        let mean = |v: f64| {
            let sel: Vec<_> = rows.iter().filter(|r| r.value == v).map(|r| r.worst_dnl).collect();
            sel.iter().sum::<f64>() / sel.len() as f64
        };
        let (a, b, c) = (mean(0.0), mean(2e-3), mean(8e-3));
        assert!(a < b && b < c, "{a} {b} {c}");
    }
}
