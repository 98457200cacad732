//! Discrete wavelet transform and universal soft-threshold denoising.
//!
//! Analysis filters and downsamples by two per level; synthesis upsamples and
//! filters with the time-reversed taps. Two boundary treatments are offered:
//!
//! - `Symmetric`: half-point symmetric extension. Each level keeps
//!   `floor((len + taps - 1) / 2)` coefficients, a few more than half, which is
//!   what exact reconstruction with non-symmetric orthogonal filters needs.
//! - `Periodic`: periodization. Each level keeps `ceil(len / 2)` coefficients;
//!   odd lengths are padded by repeating the last sample. The transform is
//!   orthogonal in this mode.

mod filters;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stats::{median, std_pop};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletKind {
    Db2,
    Db3,
    Db4,
    Db5,
    Db6,
    Db7,
    Db8,
    Sym4,
    Sym5,
    Sym6,
    Sym7,
    Sym8,
}

impl WaveletKind {
    pub const ALL: [WaveletKind; 12] = [
        WaveletKind::Db2,
        WaveletKind::Db3,
        WaveletKind::Db4,
        WaveletKind::Db5,
        WaveletKind::Db6,
        WaveletKind::Db7,
        WaveletKind::Db8,
        WaveletKind::Sym4,
        WaveletKind::Sym5,
        WaveletKind::Sym6,
        WaveletKind::Sym7,
        WaveletKind::Sym8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WaveletKind::Db2 => "db2",
            WaveletKind::Db3 => "db3",
            WaveletKind::Db4 => "db4",
            WaveletKind::Db5 => "db5",
            WaveletKind::Db6 => "db6",
            WaveletKind::Db7 => "db7",
            WaveletKind::Db8 => "db8",
            WaveletKind::Sym4 => "sym4",
            WaveletKind::Sym5 => "sym5",
            WaveletKind::Sym6 => "sym6",
            WaveletKind::Sym7 => "sym7",
            WaveletKind::Sym8 => "sym8",
        }
    }

    fn lowpass(self) -> &'static [f64] {
        match self {
            WaveletKind::Db2 => &filters::DB2,
            WaveletKind::Db3 => &filters::DB3,
            WaveletKind::Db4 => &filters::DB4,
            WaveletKind::Db5 => &filters::DB5,
            WaveletKind::Db6 => &filters::DB6,
            WaveletKind::Db7 => &filters::DB7,
            WaveletKind::Db8 => &filters::DB8,
            WaveletKind::Sym4 => &filters::SYM4,
            WaveletKind::Sym5 => &filters::SYM5,
            WaveletKind::Sym6 => &filters::SYM6,
            WaveletKind::Sym7 => &filters::SYM7,
            WaveletKind::Sym8 => &filters::SYM8,
        }
    }
}

impl fmt::Display for WaveletKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveletKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WaveletKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown wavelet '{s}'")))
    }
}

/// The four filters of a two-channel orthogonal filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub name: &'static str,
    pub analysis_lowpass: Vec<f64>,
    pub analysis_highpass: Vec<f64>,
    pub synthesis_lowpass: Vec<f64>,
    pub synthesis_highpass: Vec<f64>,
}

impl WaveletSpec {
    pub fn new(kind: WaveletKind) -> Self {
        let lo = kind.lowpass().to_vec();
        let taps = lo.len();
        // Quadrature mirror: g[j] = (-1)^(j+1) h[taps-1-j].
        let hi: Vec<f64> = (0..taps)
            .map(|j| {
                let v = lo[taps - 1 - j];
                if j % 2 == 0 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let rec_lo = lo.iter().rev().copied().collect();
        let rec_hi = hi.iter().rev().copied().collect();
        Self {
            name: kind.name(),
            analysis_lowpass: lo,
            analysis_highpass: hi,
            synthesis_lowpass: rec_lo,
            synthesis_highpass: rec_hi,
        }
    }

    pub fn taps(&self) -> usize {
        self.analysis_lowpass.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionMode {
    Symmetric,
    Periodic,
}

impl FromStr for ExtensionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(ExtensionMode::Symmetric),
            "periodic" => Ok(ExtensionMode::Periodic),
            _ => Err(Error::config(format!("unknown extension mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaEstimator {
    /// `median(|finest detail|) / 0.6745`.
    MadFinest,
    /// Population std of the input signal.
    SignalStd,
}

impl FromStr for SigmaEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mad_finest" | "mad-finest" | "mad" => Ok(SigmaEstimator::MadFinest),
            "signal_std" | "signal-std" => Ok(SigmaEstimator::SignalStd),
            _ => Err(Error::config(format!("unknown sigma estimator '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    pub wavelet: WaveletKind,
    pub levels: usize,
    pub sigma_estimator: SigmaEstimator,
    pub extension_mode: ExtensionMode,
    /// Detail levels to threshold (1 = finest); `None` thresholds all.
    pub threshold_levels: Option<Vec<usize>>,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletKind::Db4,
            levels: 4,
            sigma_estimator: SigmaEstimator::MadFinest,
            extension_mode: ExtensionMode::Symmetric,
            threshold_levels: None,
        }
    }
}

/// Deepest level allowed for `n` samples: `floor(log2 n) - 2`, so that
/// `2^levels <= n / 4`.
pub fn max_levels(n: usize) -> usize {
    if n < 8 {
        0
    } else {
        (n.ilog2() as usize).saturating_sub(2)
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::config("levels must be at least 1"));
        }
        if let Some(sel) = &self.threshold_levels {
            if let Some(&bad) = sel.iter().find(|&&l| l == 0 || l > self.levels) {
                return Err(Error::config(format!(
                    "threshold level {bad} outside 1..={}",
                    self.levels
                )));
            }
        }
        Ok(())
    }

    fn check_length(&self, n: usize) -> Result<()> {
        self.validate()?;
        if self.levels > max_levels(n) {
            return Err(Error::config(format!(
                "{n} samples support at most {} levels, {} requested",
                max_levels(n),
                self.levels
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    /// Coarsest scaling coefficients.
    pub approximation: Vec<f64>,
    /// Detail coefficients per level, finest first.
    pub details: Vec<Vec<f64>>,
    pub level_count: usize,
    pub original_length: usize,
    pub extension_mode: ExtensionMode,
    /// Input length at each level, finest first (`level_lengths[0]` is the
    /// signal length).
    pub level_lengths: Vec<usize>,
}

/// Index into `0..n` under half-point symmetric extension.
fn symmetric_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let r = i.rem_euclid(period) as usize;
    if r < n {
        r
    } else {
        2 * n - 1 - r
    }
}

fn analyze_level(x: &[f64], spec: &WaveletSpec, mode: ExtensionMode) -> (Vec<f64>, Vec<f64>) {
    let taps = spec.taps();
    let (lo, hi) = (&spec.analysis_lowpass, &spec.analysis_highpass);
    match mode {
        ExtensionMode::Symmetric => {
            let n = x.len();
            let out = (n + taps - 1) / 2;
            let mut approx = vec![0.0; out];
            let mut detail = vec![0.0; out];
            for k in 0..out {
                let (mut a, mut d) = (0.0, 0.0);
                for j in 0..taps {
                    let v = x[symmetric_index(2 * k as isize + 1 - j as isize, n)];
                    a += lo[j] * v;
                    d += hi[j] * v;
                }
                approx[k] = a;
                detail[k] = d;
            }
            (approx, detail)
        }
        ExtensionMode::Periodic => {
            let padded = padded_even(x);
            let m = padded.len();
            let out = m / 2;
            let mut approx = vec![0.0; out];
            let mut detail = vec![0.0; out];
            for k in 0..out {
                let (mut a, mut d) = (0.0, 0.0);
                for j in 0..taps {
                    let v = padded[(2 * k as isize + 1 - j as isize).rem_euclid(m as isize) as usize];
                    a += lo[j] * v;
                    d += hi[j] * v;
                }
                approx[k] = a;
                detail[k] = d;
            }
            (approx, detail)
        }
    }
}

fn padded_even(x: &[f64]) -> std::borrow::Cow<'_, [f64]> {
    if x.len().is_multiple_of(2) {
        std::borrow::Cow::Borrowed(x)
    } else {
        let mut v = x.to_vec();
        v.push(*x.last().expect("non-empty level"));
        std::borrow::Cow::Owned(v)
    }
}

fn synthesize_level(
    approx: &[f64],
    detail: &[f64],
    out_len: usize,
    spec: &WaveletSpec,
    mode: ExtensionMode,
) -> Vec<f64> {
    let taps = spec.taps();
    match mode {
        ExtensionMode::Symmetric => {
            let (lo, hi) = (&spec.synthesis_lowpass, &spec.synthesis_highpass);
            let full = 2 * (approx.len() - 1) + taps;
            let mut y = vec![0.0; full];
            for (k, (&a, &d)) in approx.iter().zip(detail).enumerate() {
                for j in 0..taps {
                    y[2 * k + j] += lo[j] * a + hi[j] * d;
                }
            }
            y[taps - 2..taps - 2 + out_len].to_vec()
        }
        ExtensionMode::Periodic => {
            // Adjoint of the periodized analysis, which is its inverse.
            let (lo, hi) = (&spec.analysis_lowpass, &spec.analysis_highpass);
            let m = 2 * approx.len();
            let mut x = vec![0.0; m];
            for (k, (&a, &d)) in approx.iter().zip(detail).enumerate() {
                for j in 0..taps {
                    let idx = (2 * k as isize + 1 - j as isize).rem_euclid(m as isize) as usize;
                    x[idx] += lo[j] * a + hi[j] * d;
                }
            }
            x.truncate(out_len);
            x
        }
    }
}

/// Multilevel forward transform.
pub fn dwt(signal: &[f64], cfg: &DenoiseConfig) -> Result<WaveletCoefficients> {
    let n = signal.len();
    cfg.check_length(n)?;
    if let Some(i) = signal.iter().position(|x| !x.is_finite()) {
        return Err(Error::input(format!("non-finite sample at index {i}")));
    }
    let spec = WaveletSpec::new(cfg.wavelet);
    let mut details = Vec::with_capacity(cfg.levels);
    let mut level_lengths = Vec::with_capacity(cfg.levels);
    let mut current = signal.to_vec();
    for _ in 0..cfg.levels {
        level_lengths.push(current.len());
        let (a, d) = analyze_level(&current, &spec, cfg.extension_mode);
        details.push(d);
        current = a;
    }
    Ok(WaveletCoefficients {
        approximation: current,
        details,
        level_count: cfg.levels,
        original_length: n,
        extension_mode: cfg.extension_mode,
        level_lengths,
    })
}

/// Multilevel inverse transform.
pub fn idwt(coeffs: &WaveletCoefficients, cfg: &DenoiseConfig) -> Result<Vec<f64>> {
    let levels = coeffs.level_count;
    if coeffs.details.len() != levels || coeffs.level_lengths.len() != levels || levels == 0 {
        return Err(Error::input(format!(
            "inconsistent coefficients: {} levels, {} detail bands, {} recorded lengths",
            levels,
            coeffs.details.len(),
            coeffs.level_lengths.len()
        )));
    }
    if coeffs.level_lengths[0] != coeffs.original_length {
        return Err(Error::input("first level length differs from original length"));
    }
    if coeffs.extension_mode != cfg.extension_mode {
        return Err(Error::input("coefficients were computed with another extension mode"));
    }
    let spec = WaveletSpec::new(cfg.wavelet);
    let mut current = coeffs.approximation.clone();
    for level in (0..levels).rev() {
        let detail = &coeffs.details[level];
        if detail.len() != current.len() {
            return Err(Error::input(format!(
                "level {} has {} detail and {} approximation coefficients",
                level + 1,
                detail.len(),
                current.len()
            )));
        }
        current = synthesize_level(
            &current,
            detail,
            coeffs.level_lengths[level],
            &spec,
            coeffs.extension_mode,
        );
    }
    Ok(current)
}

/// `sigma * sqrt(2 ln n)`.
pub fn universal_threshold(sigma: f64, n: usize) -> f64 {
    sigma * (2.0 * (n.max(1) as f64).ln()).sqrt()
}

/// `sgn(w) (|w| - lambda)` where `|w| > lambda`, zero elsewhere.
pub fn soft_threshold(coefficients: &[f64], lambda: f64) -> Vec<f64> {
    coefficients.iter().map(|&w| soft_threshold_one(w, lambda)).collect()
}

pub(crate) fn soft_threshold_one(w: f64, lambda: f64) -> f64 {
    if w.abs() > lambda {
        w.signum() * (w.abs() - lambda)
    } else {
        0.0
    }
}

/// Noise level for the universal threshold.
pub fn estimate_sigma(signal: &[f64], coeffs: &WaveletCoefficients, est: SigmaEstimator) -> f64 {
    match est {
        SigmaEstimator::MadFinest => {
            let abs: Vec<f64> = coeffs.details[0].iter().map(|v| v.abs()).collect();
            median(&abs) / 0.6745
        }
        SigmaEstimator::SignalStd => std_pop(signal),
    }
}

/// Forward transform, soft-threshold the detail bands with the universal
/// threshold, inverse transform. The approximation band is never touched.
pub fn wavelet_denoise(signal: &[f64], cfg: &DenoiseConfig) -> Result<Vec<f64>> {
    let mut coeffs = dwt(signal, cfg)?;
    let sigma = estimate_sigma(signal, &coeffs, cfg.sigma_estimator);
    let lambda = universal_threshold(sigma, signal.len());
    for (i, band) in coeffs.details.iter_mut().enumerate() {
        let selected = cfg
            .threshold_levels
            .as_ref()
            .is_none_or(|sel| sel.contains(&(i + 1)));
        if selected {
            for w in band.iter_mut() {
                *w = soft_threshold_one(*w, lambda);
            }
        }
    }
    idwt(&coeffs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::gaussian_noise;
    use crate::stats::max_abs;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn cfg(kind: WaveletKind, levels: usize, mode: ExtensionMode) -> DenoiseConfig {
        DenoiseConfig {
            wavelet: kind,
            levels,
            extension_mode: mode,
            ..DenoiseConfig::default()
        }
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let d = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        d / max_abs(a).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn filters_are_orthonormal() {
        for kind in WaveletKind::ALL {
            let h = WaveletSpec::new(kind).analysis_lowpass;
            let sum: f64 = h.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12, "{kind}");
            for shift in (0..h.len()).step_by(2) {
                let dot: f64 = (0..h.len() - shift).map(|j| h[j] * h[j + shift]).sum();
                let want = if shift == 0 { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "{kind} shift {shift}");
            }
        }
    }

    #[test]
    fn impulse_matches_convolution_oracle() {
        // Literal oracle: extend, full convolution, keep odd positions.
        let n = 32;
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        let spec = WaveletSpec::new(WaveletKind::Db4);
        let taps = spec.taps();
        let pad = taps - 1;
        let mut ext = Vec::new();
        for i in 0..pad {
            ext.push(x[pad - 1 - i]);
        }
        ext.extend_from_slice(&x);
        for i in 0..pad {
            ext.push(x[n - 1 - i]);
        }
        let conv = |f: &[f64]| -> Vec<f64> {
            (0..ext.len() + taps - 1)
                .map(|i| {
                    (0..taps)
                        .filter(|&j| i >= j && i - j < ext.len())
                        .map(|j| f[j] * ext[i - j])
                        .sum()
                })
                .collect()
        };
        let full_lo = conv(&spec.analysis_lowpass);
        let full_hi = conv(&spec.analysis_highpass);
        let out = (n + taps - 1) / 2;
        let want_a: Vec<f64> = (0..out).map(|k| full_lo[pad + 2 * k + 1]).collect();
        let want_d: Vec<f64> = (0..out).map(|k| full_hi[pad + 2 * k + 1]).collect();

        let c = dwt(&x, &cfg(WaveletKind::Db4, 1, ExtensionMode::Symmetric)).unwrap();
        assert_eq!(c.approximation.len(), out);
        for (a, b) in c.approximation.iter().zip(&want_a) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in c.details[0].iter().zip(&want_d) {
            assert!((a - b).abs() < 1e-14);
        }
        // The interior of the response is the filter itself, reversed and
        // subsampled: detail[k] = g[2k+1] + g[2k] for the doubled impulse at
        // x[-1] = x[0] = 1.
        let g = &spec.analysis_highpass;
        for k in 0..taps / 2 {
            let mut want = g[2 * k + 1];
            if 2 * k + 2 < taps {
                want += g[2 * k + 2];
            }
            assert!((c.details[0][k] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_have_no_detail() {
        let x = vec![2.5; 256];
        for kind in WaveletKind::ALL {
            for mode in [ExtensionMode::Symmetric, ExtensionMode::Periodic] {
                let c = dwt(&x, &cfg(kind, 3, mode)).unwrap();
                for band in &c.details {
                    assert!(max_abs(band) < 1e-10, "{kind} {mode:?}");
                }
            }
        }
    }

    #[test]
    fn perfect_reconstruction_random_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for i in 0..50 {
            let n = 200 + 7 * i;
            let x = gaussian_noise(n, &mut rng);
            for mode in [ExtensionMode::Symmetric, ExtensionMode::Periodic] {
                let c = cfg(WaveletKind::Db4, 4, mode);
                let y = idwt(&dwt(&x, &c).unwrap(), &c).unwrap();
                assert_eq!(y.len(), n);
                assert!(rel_err(&x, &y) < 1e-10);
            }
        }
    }

    #[test]
    fn subband_lengths() {
        let x = vec![1.0; 101];
        let c = dwt(&x, &cfg(WaveletKind::Db4, 2, ExtensionMode::Periodic)).unwrap();
        assert_eq!(c.details[0].len(), 51);
        assert_eq!(c.details[1].len(), 26);
        assert_eq!(c.level_lengths, vec![101, 51]);
        let c = dwt(&x, &cfg(WaveletKind::Db4, 2, ExtensionMode::Symmetric)).unwrap();
        assert_eq!(c.details[0].len(), 54);
        assert_eq!(c.details[1].len(), 30);
    }

    #[test]
    fn too_many_levels() {
        let x = vec![0.0; 63];
        assert_eq!(max_levels(63), 3);
        assert!(matches!(
            dwt(&x, &cfg(WaveletKind::Db4, 4, ExtensionMode::Symmetric)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(dwt(&x, &cfg(WaveletKind::Db4, 3, ExtensionMode::Symmetric)).is_ok());
    }

    #[test]
    fn idwt_rejects_inconsistent_coefficients() {
        let c = cfg(WaveletKind::Db4, 2, ExtensionMode::Symmetric);
        let mut coeffs = dwt(&vec![1.0; 64], &c).unwrap();
        coeffs.details.pop();
        assert!(idwt(&coeffs, &c).is_err());
    }

    #[test]
    fn lowpass_only_constant() {
        let c = cfg(WaveletKind::Db4, 3, ExtensionMode::Symmetric);
        let mut coeffs = dwt(&vec![-1.25; 128], &c).unwrap();
        for band in &mut coeffs.details {
            band.iter_mut().for_each(|v| *v = 0.0);
        }
        let y = idwt(&coeffs, &c).unwrap();
        assert!(y.iter().all(|v| (v + 1.25).abs() < 1e-10));
    }

    #[test]
    fn universal_threshold_values() {
        assert_eq!(universal_threshold(0.0, 1024), 0.0);
        assert_eq!(universal_threshold(1.0, 1), 0.0);
        let want = 0.1 * (2.0 * 1024f64.ln()).sqrt();
        assert!((universal_threshold(0.1, 1024) - want).abs() < 1e-15);
        assert!((universal_threshold(0.1, 1024) - 0.37233).abs() < 1e-5);
    }

    #[test]
    fn soft_threshold_values() {
        assert_eq!(soft_threshold(&[5.0, -1.0, -5.0, 2.0, -2.0], 2.0), vec![3.0, 0.0, -3.0, 0.0, 0.0]);
    }

    #[test]
    fn shrinkage_does_not_add_energy() {
        // Orthogonal in periodic mode, so coefficient shrinkage lowers energy.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let x = gaussian_noise(256, &mut rng);
            let c = cfg(WaveletKind::Db4, 4, ExtensionMode::Periodic);
            let y = wavelet_denoise(&x, &c).unwrap();
            let ex: f64 = x.iter().map(|v| v * v).sum();
            let ey: f64 = y.iter().map(|v| v * v).sum();
            assert!(ey <= ex);
        }
    }

    #[test]
    fn denoise_zero_signal() {
        let y = wavelet_denoise(&[0.0; 128], &DenoiseConfig::default()).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn denoise_improves_noisy_sine() {
        use crate::signals::{add_noise_snr, snr, Signal};
        let x: Vec<f64> = (0..1000).map(|i| (TAU * 20.0 * i as f64 / 1000.0).sin()).collect();
        let clean = Signal::new(x, 1000.0).unwrap();
        for seed in 0..5 {
            let noisy = add_noise_snr(&clean, 5.0, seed).unwrap();
            let y = wavelet_denoise(noisy.samples(), &DenoiseConfig::default()).unwrap();
            assert!(snr(clean.samples(), &y).unwrap() > 5.0);
        }
    }

    #[test]
    fn denoise_keeps_clean_sine() {
        let x: Vec<f64> = (0..1000).map(|i| (TAU * 20.0 * i as f64 / 1000.0).sin()).collect();
        let y = wavelet_denoise(&x, &DenoiseConfig::default()).unwrap();
        let d = x.iter().zip(&y).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 0.15, "{d}");
    }

    #[test]
    fn threshold_level_subset() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gaussian_noise(256, &mut rng);
        let mut c = DenoiseConfig {
            threshold_levels: Some(vec![]),
            ..DenoiseConfig::default()
        };
        let y = wavelet_denoise(&x, &c).unwrap();
        assert!(rel_err(&x, &y) < 1e-10);
        c.threshold_levels = Some(vec![5]);
        assert!(wavelet_denoise(&x, &c).is_err());
    }

    #[test]
    fn names_parse() {
        for kind in WaveletKind::ALL {
            assert_eq!(kind.name().parse::<WaveletKind>().unwrap(), kind);
        }
        assert!("haar".parse::<WaveletKind>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn soft_threshold_law(w in -10.0f64..10.0, lambda in 0.0f64..5.0) {
            let got = soft_threshold_one(w, lambda);
            prop_assert!(got.abs() <= (w.abs() - lambda).max(0.0) + 1e-15);
            prop_assert_eq!(got, w.signum() * (w.abs() - lambda).max(0.0));
        }

        #[test]
        fn threshold_monotone(s1 in 0.0f64..3.0, s2 in 0.0f64..3.0, n1 in 1usize..5000, n2 in 1usize..5000) {
            let (lo_s, hi_s) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let (lo_n, hi_n) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
            prop_assert!(universal_threshold(lo_s, lo_n) <= universal_threshold(hi_s, hi_n));
        }
    }
}
