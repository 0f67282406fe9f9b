use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{AdcError, Result};
use crate::stage::ReferencePair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearityMethod {
    Histogram,
    Transitions,
}

/// INL reference line: through the first and last interior-code points.
pub const INL_CONVENTION: &str = "endpoint";

/// DNL and INL for interior codes `1..=2^N - 2`; entry `i` is code `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearityReport {
    pub method: LinearityMethod,
    pub inl_convention: String,
    pub resolution: u32,
    pub codes_tested: usize,
    pub worst_dnl: f64,
    pub worst_inl: f64,
    /// Interior codes that never occurred (DNL of exactly -1).
    pub missing_codes: Vec<u32>,
    pub dnl: Vec<f64>,
    pub inl: Vec<f64>,
}

impl LinearityReport {
    fn from_dnl(method: LinearityMethod, resolution: u32, dnl: Vec<f64>) -> Self {
        let inl = inl_from_dnl(&dnl);
        let worst = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let missing_codes = dnl
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == -1.0)
            .map(|(i, _)| i as u32 + 1)
            .collect();
        Self {
            method,
            inl_convention: INL_CONVENTION.to_string(),
            resolution,
            codes_tested: dnl.len(),
            worst_dnl: worst(&dnl),
            worst_inl: worst(&inl),
            missing_codes,
            dnl,
            inl,
        }
    }

    /// Code number for array position `i`.
    pub fn code_at(&self, i: usize) -> u32 {
        i as u32 + 1
    }
}

/// Running sum of DNL with the straight line through its first and last
/// points removed, so both ends sit at zero.
pub fn inl_from_dnl(dnl: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let cum: Vec<f64> = dnl
        .iter()
        .map(|d| {
            acc += d;
            acc
        })
        .collect();
    match cum.len() {
        0 => Vec::new(),
        1 => vec![0.0],
        m => {
            let (first, last) = (cum[0], cum[m - 1]);
            let span = (m - 1) as f64;
            cum.iter()
                .enumerate()
                .map(|(i, c)| c - (first + (last - first) * i as f64 / span))
                .collect()
        }
    }
}

/// Code-density linearity from a ramp capture.
pub fn histogram_linearity(codes: &[u32], resolution: u32) -> Result<LinearityReport> {
    if !(2..=24).contains(&resolution) {
        return Err(AdcError::domain(format!("resolution {resolution} outside 2..=24")));
    }
    let n_codes = 1usize << resolution;
    let mut hist = vec![0u64; n_codes];
    for &c in codes {
        let slot = hist
            .get_mut(c as usize)
            .ok_or_else(|| AdcError::domain(format!("code {c} exceeds {}-bit range", resolution)))?;
        *slot += 1;
    }
    if hist.iter().filter(|&&h| h > 0).count() < 2 {
        return Err(AdcError::domain("degenerate capture: fewer than two distinct codes"));
    }
    let interior = &hist[1..n_codes - 1];
    let total: u64 = interior.iter().sum();
    if total == 0 {
        return Err(AdcError::domain("degenerate capture: no interior codes hit"));
    }
    let mean = total as f64 / interior.len() as f64;
    if mean < 32.0 {
        warn!("only {mean:.1} samples per code on average; DNL resolution is coarse");
    }
    let dnl = interior.iter().map(|&h| h as f64 / mean - 1.0).collect();
    Ok(LinearityReport::from_dnl(LinearityMethod::Histogram, resolution, dnl))
}

/// Located code transitions; `levels[k - 1]` is where code `k` first appears.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionLevels {
    pub levels: Vec<f64>,
    /// Codes whose transition was not found above the previous one, or which
    /// the bisection could not bracket.
    pub non_monotone: Vec<u32>,
}

/// Locate every code transition by bisection on a deterministic converter.
pub fn transition_levels<F>(mut adc: F, resolution: u32, refs: &ReferencePair, tol: f64) -> Result<TransitionLevels>
where
    F: FnMut(f64) -> Result<u32>,
{
    if !(tol > 0.0) {
        return Err(AdcError::domain("transition tolerance must be positive"));
    }
    if !(1..=24).contains(&resolution) {
        return Err(AdcError::domain(format!("resolution {resolution} outside 1..=24")));
    }
    let fs = refs.full_scale();
    let (floor, ceil) = (refs.vrefn - fs, refs.vrefp + fs);
    let (code_lo, code_hi) = (adc(floor)?, adc(ceil)?);
    let top = (1u32 << resolution) - 1;
    let mut levels = Vec::with_capacity(top as usize);
    let mut non_monotone = Vec::new();
    for k in 1..=top {
        if code_lo >= k {
            levels.push(floor);
            non_monotone.push(k);
            continue;
        }
        if code_hi < k {
            levels.push(ceil);
            non_monotone.push(k);
            continue;
        }
        let (mut lo, mut hi) = (floor, ceil);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if adc(mid)? >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        if levels.last().is_some_and(|&prev| t <= prev) {
            non_monotone.push(k);
        }
        levels.push(t);
    }
    Ok(TransitionLevels { levels, non_monotone })
}

/// Linearity from transition levels, normalized to the endpoint LSB.
pub fn linearity_from_transitions(levels: &[f64]) -> Result<LinearityReport> {
    let n_codes = levels.len() + 1;
    if n_codes < 4 || !n_codes.is_power_of_two() {
        return Err(AdcError::domain(format!(
            "expected 2^N - 1 transition levels with N >= 2, got {}",
            levels.len()
        )));
    }
    if let Some(i) = levels.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(AdcError::domain(format!(
            "transition levels not strictly increasing at code {}",
            i + 2
        )));
    }
    let lsb = (levels[levels.len() - 1] - levels[0]) / (levels.len() - 1) as f64;
    let dnl = levels.windows(2).map(|w| (w[1] - w[0]) / lsb - 1.0).collect();
    Ok(LinearityReport::from_dnl(
        LinearityMethod::Transitions,
        n_codes.trailing_zeros(),
        dnl,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Floor quantizer written out directly, ties to the upper code.
    fn floor_adc(v: f64) -> Result<u32> {
        let lsb = 2.0 / 256.0;
        Ok(((v + 1.0) / lsb).floor().clamp(0.0, 255.0) as u32)
    }

    #[test]
    fn histogram_of_ideal_ramp() {
        let n = 65_536;
        let codes: Vec<u32> = (0..n)
            .map(|i| floor_adc(-1.0 + 2.0 * i as f64 / (n - 1) as f64).unwrap())
            .collect();
        let r = histogram_linearity(&codes, 8).unwrap();
        assert_eq!(r.dnl.len(), 254);
        assert_eq!(r.inl.len(), 254);
        assert!(r.worst_dnl <= 0.02, "{}", r.worst_dnl);
        assert!(r.worst_inl <= 0.02, "{}", r.worst_inl);
        assert!(r.dnl.iter().sum::<f64>().abs() < 1e-9);
        assert!(r.missing_codes.is_empty());
    }

    #[test]
    fn histogram_flags_missing_code() {
        let codes: Vec<u32> = (0..256u32)
            .flat_map(|c| std::iter::repeat_n(c, 64))
            .filter(|&c| c != 100)
            .collect();
        let r = histogram_linearity(&codes, 8).unwrap();
        assert_eq!(r.dnl[99], -1.0);
        assert_eq!(r.missing_codes, vec![100]);
    }

    #[test]
    fn histogram_rejects_degenerate() {
        assert!(histogram_linearity(&[17; 1000], 8).is_err());
        assert!(histogram_linearity(&[0, 255], 8).is_err());
        assert!(histogram_linearity(&[0, 256], 8).is_err());
    }

    #[test]
    fn ideal_transitions() {
        let refs = ReferencePair::default();
        let t = transition_levels(floor_adc, 8, &refs, 1e-10).unwrap();
        assert!(t.non_monotone.is_empty());
        assert_eq!(t.levels.len(), 255);
        assert!((t.levels[127] - 0.0).abs() < 1e-10);
        assert!((t.levels[0] - (-0.992_187_5)).abs() < 1e-10);
        for (i, &lvl) in t.levels.iter().enumerate() {
            let want = -1.0 + (i + 1) as f64 * (2.0 / 256.0);
            assert!((lvl - want).abs() < 1e-10);
        }
    }

    #[test]
    fn transitions_flag_non_monotone() {
        // Codes 10 and 11 swapped in the transfer curve.
        let swapped = |v: f64| {
            floor_adc(v).map(|c| match c {
                10 => 11,
                11 => 10,
                c => c,
            })
        };
        let t = transition_levels(swapped, 8, &ReferencePair::default(), 1e-9).unwrap();
        assert!(!t.non_monotone.is_empty());
        assert!(linearity_from_transitions(&t.levels).is_err());
    }

    #[test]
    fn exact_levels_give_zero_linearity_error() {
        let levels: Vec<f64> = (1..256).map(|k| -1.0 + k as f64 / 128.0).collect();
        let r = linearity_from_transitions(&levels).unwrap();
        assert!(r.dnl.iter().all(|&d| d == 0.0));
        assert!(r.inl.iter().all(|&d| d == 0.0));
        assert_eq!(r.resolution, 8);
    }

    #[test]
    fn doubled_gap() {
        // Gap above code 50's lower edge is two ideal LSBs wide.
        let mut levels = Vec::new();
        let mut t = 0.0;
        for k in 1..256 {
            levels.push(t);
            t += if k == 50 { 2.0 } else { 1.0 };
        }
        let r = linearity_from_transitions(&levels).unwrap();
        // Endpoint LSB is 255/254 ideal LSBs.
        let wide = 2.0 * 254.0 / 255.0 - 1.0;
        let narrow = 254.0 / 255.0 - 1.0;
        assert!((r.dnl[49] - wide).abs() < 1e-12);
        assert!((r.dnl[0] - narrow).abs() < 1e-12);
        assert!((r.worst_dnl - 0.992_156_862_745).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_levels() {
        assert!(linearity_from_transitions(&[0.0, 1.0]).is_err());
        let mut levels: Vec<f64> = (0..255).map(f64::from).collect();
        levels[10] = levels[9];
        assert!(linearity_from_transitions(&levels).is_err());
    }

    #[test]
    fn inl_anchored_at_ends() {
        let dnl = [0.1, -0.2, 0.3, 0.05, -0.25];
        let inl = inl_from_dnl(&dnl);
        assert!(inl[0].abs() < 1e-15 && inl[4].abs() < 1e-15);
        // Running sum 0.1, -0.1, 0.2, 0.25, 0.0 minus the line 0.1 -> 0.0.
        assert!((inl[2] - (0.2 - 0.05)).abs() < 1e-15);
    }

    #[test]
    fn histogram_and_transitions_agree() {
        // A deterministic non-ideal staircase: code widths alternate.
        let mut edges = vec![f64::NEG_INFINITY];
        let mut t = -1.0;
        for k in 1..256 {
            t += if k % 3 == 0 { 1.3 } else { 0.85 } * (2.0 / 256.0);
            edges.push(t);
        }
        let adc = |v: f64| -> Result<u32> { Ok(edges.partition_point(|&e| e <= v) as u32 - 1) };
        let lo = edges[1] - 0.01;
        let hi = edges[255] + 0.01;
        let n = 256 * 128;
        let codes: Vec<u32> = (0..n)
            .map(|i| adc(lo + (hi - lo) * i as f64 / (n - 1) as f64).unwrap())
            .collect();
        let h = histogram_linearity(&codes, 8).unwrap();
        let levels = transition_levels(adc, 8, &ReferencePair::default(), 1e-12).unwrap();
        let tr = linearity_from_transitions(&levels.levels).unwrap();
        for (a, b) in h.dnl.iter().zip(&tr.dnl) {
            assert!((a - b).abs() <= 0.05, "{a} vs {b}");
        }
    }
}
