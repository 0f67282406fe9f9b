use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};

/// Floor applied when expressing zero-power bins in dB.
const DB_FLOOR: f64 = -400.0;

/// One-sided power spectrum of the mean-removed first `nfft` samples.
///
/// Rectangular window; bin powers sum to the record's AC mean-square value.
pub fn power_spectrum(samples: &[f64], nfft: usize) -> Result<Vec<f64>> {
    if !nfft.is_power_of_two() || nfft < 2 {
        return Err(AdcError::domain(format!("FFT length must be a power of two >= 2, got {nfft}")));
    }
    if samples.len() < nfft {
        return Err(AdcError::domain(format!(
            "record has {} samples, FFT needs {nfft}",
            samples.len()
        )));
    }
    let block = &samples[..nfft];
    let mean = block.iter().sum::<f64>() / nfft as f64;
    let mut buf: Vec<Complex<f64>> = block.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let norm = 1.0 / (nfft as f64 * nfft as f64);
    let half = nfft / 2;
    Ok((0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * norm;
            if k == 0 || k == half {
                p
            } else {
                2.0 * p
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMetrics {
    pub sndr_db: f64,
    pub sfdr_db: f64,
    pub enob_bits: f64,
}

pub fn enob_from_sndr(sndr_db: f64) -> f64 {
    (sndr_db - 1.76) / 6.02
}

/// SNDR, SFDR and ENOB with the signal confined to `signal_bin` and DC excluded.
pub fn sndr_enob(power: &[f64], signal_bin: usize) -> Result<SpectralMetrics> {
    if signal_bin == 0 || signal_bin >= power.len() {
        return Err(AdcError::domain(format!(
            "signal bin {signal_bin} outside 1..{}",
            power.len()
        )));
    }
    let signal = power[signal_bin];
    if !(signal > 0.0) {
        return Err(AdcError::domain("signal bin carries no power"));
    }
    let others = power.iter().enumerate().skip(1).filter(|&(k, _)| k != signal_bin).map(|(_, &p)| p);
    let (noise, spur) = others.fold((0.0f64, 0.0f64), |(sum, max), p| (sum + p, max.max(p)));
    if !(noise > 0.0) {
        return Err(AdcError::domain("no noise or distortion power; SNDR is unbounded"));
    }
    let sndr_db = 10.0 * (signal / noise).log10();
    Ok(SpectralMetrics {
        sndr_db,
        sfdr_db: 10.0 * (signal / spur).log10(),
        enob_bits: enob_from_sndr(sndr_db),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub nfft: usize,
    pub signal_bin: usize,
    pub sndr_db: f64,
    pub sfdr_db: f64,
    pub enob_bits: f64,
    /// Free-form remarks, e.g. stimulus substitutions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Per-bin power in dB relative to the signal bin.
    pub power_db: Vec<f64>,
}

impl SpectrumReport {
    pub fn normalized_frequency(&self, bin: usize) -> f64 {
        bin as f64 / self.nfft as f64
    }
}

pub fn analyze_spectrum(samples: &[f64], nfft: usize, signal_bin: usize) -> Result<SpectrumReport> {
    let power = power_spectrum(samples, nfft)?;
    let m = sndr_enob(&power, signal_bin)?;
    let ps = power[signal_bin];
    let power_db = power
        .iter()
        .map(|&p| if p > 0.0 { (10.0 * (p / ps).log10()).max(DB_FLOOR) } else { DB_FLOOR })
        .collect();
    Ok(SpectrumReport {
        nfft,
        signal_bin,
        sndr_db: m.sndr_db,
        sfdr_db: m.sfdr_db,
        enob_bits: m.enob_bits,
        notes: Vec::new(),
        power_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Direct O(n²) DFT, used as an independent check on the FFT path.
    fn naive_power(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -2.0 * PI * (k * t % n) as f64 / n as f64;
                    re += (v - mean) * ang.cos();
                    im += (v - mean) * ang.sin();
                }
                let p = (re * re + im * im) / (n * n) as f64;
                if k == 0 || k == n / 2 { p } else { 2.0 * p }
            })
            .collect()
    }

    fn sine(n: usize, j: usize) -> Vec<f64> {
        (0..n).map(|k| (2.0 * PI * ((j * k) % n) as f64 / n as f64).sin()).collect()
    }

    #[test]
    fn matches_direct_dft() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64).sqrt() - 1.3).collect();
        let fast = power_spectrum(&x, 64).unwrap();
        let slow = naive_power(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_input_has_no_ac_power() {
        let p = power_spectrum(&[137.0; 1024], 1024).unwrap();
        assert_eq!(p.len(), 513);
        assert!(p.iter().all(|&v| v <= 1e-30));
    }

    #[test]
    fn coherent_sine_is_single_bin() {
        let p = power_spectrum(&sine(1024, 479), 1024).unwrap();
        let total: f64 = p.iter().sum();
        let leak: f64 = total - p[479];
        assert!(leak / total < 1e-10, "{}", leak / total);
        assert!((p[479] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parseval() {
        let x: Vec<f64> = (0..1024).map(|i| ((i * 7919) % 256) as f64).collect();
        let p = power_spectrum(&x, 1024).unwrap();
        let mean = x.iter().sum::<f64>() / 1024.0;
        let ms = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1024.0;
        assert!((p.iter().sum::<f64>() - ms).abs() / ms < 1e-9);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(power_spectrum(&[0.0; 100], 128).is_err());
        assert!(power_spectrum(&[0.0; 100], 96).is_err());
    }

    #[test]
    fn enob_anchors() {
        assert!((enob_from_sndr(44.86) - 7.159_468).abs() < 1e-6);
        assert!((enob_from_sndr(49.92) - 8.0).abs() < 1e-12);
        assert!(enob_from_sndr(50.0) > enob_from_sndr(49.0));
    }

    #[test]
    fn sndr_of_constructed_spectrum() {
        // Signal 1.0, noise spread 0.01 over the rest, one spur at 0.004.
        let mut p = vec![0.0; 9];
        p[0] = 5.0;
        p[3] = 1.0;
        p[5] = 0.004;
        p[7] = 0.006;
        let m = sndr_enob(&p, 3).unwrap();
        assert!((m.sndr_db - 20.0).abs() < 1e-12);
        assert!((m.sfdr_db - 10.0 * (1.0f64 / 0.006).log10()).abs() < 1e-12);
        assert!(sndr_enob(&p, 0).is_err());
        assert!(sndr_enob(&p, 2).is_err());
        assert!(sndr_enob(&p, 9).is_err());
    }

    #[test]
    fn report_is_relative_to_signal() {
        let x: Vec<f64> = sine(256, 13).iter().map(|v| (v * 100.0).round()).collect();
        let r = analyze_spectrum(&x, 256, 13).unwrap();
        assert_eq!(r.power_db[13], 0.0);
        assert_eq!(r.power_db.len(), 129);
        assert!(r.power_db.iter().all(|v| v.is_finite()));
        assert!((r.enob_bits - enob_from_sndr(r.sndr_db)).abs() < 1e-12);
    }
}
