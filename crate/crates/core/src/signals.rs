//! Benchmark signals, noise injection, quality metrics and spectra.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::stats::compensated_sum;
use crate::{Error, Result};

/// A uniformly sampled real-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::input(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::input(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time stamp of sample `i` in seconds.
    pub fn time_of(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate_hz
    }
}

/// Sampling grid and tone frequencies for the two-tone benchmark signal.
///
/// The defaults put the continuous tone at 20 Hz and the burst at 100 Hz.
/// Setting them to 10 Hz and 50 Hz gives `sin(20 pi t) + 0.4 sin(100 pi t)`
/// with `t` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub low_tone_hz: f64,
    pub burst_tone_hz: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 1000.0,
            duration_s: 1.0,
            low_tone_hz: 20.0,
            burst_tone_hz: 100.0,
        }
    }
}

impl SynthConfig {
    pub fn n_samples(&self) -> usize {
        (self.sample_rate_hz * self.duration_s).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::config("sample_rate_hz must be positive"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::config("duration_s must be positive"));
        }
        for (name, f) in [("low_tone_hz", self.low_tone_hz), ("burst_tone_hz", self.burst_tone_hz)] {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.n_samples() < 100 {
            return Err(Error::config(format!(
                "sample_rate_hz * duration_s must give at least 100 samples, got {}",
                self.n_samples()
            )));
        }
        Ok(())
    }
}

/// The benchmark signal at time `t`: a unit sine at `low_tone_hz` plus a
/// burst of amplitude 0.4 at `burst_tone_hz`, switched on for
/// 0.15 s <= t <= 0.25 s.
pub fn synth_value(cfg: &SynthConfig, t: f64) -> f64 {
    use std::f64::consts::TAU;
    let low = (TAU * cfg.low_tone_hz * t).sin();
    let burst = if (0.15..=0.25).contains(&t) {
        0.4 * (TAU * cfg.burst_tone_hz * t).sin()
    } else {
        0.0
    };
    low + burst
}

pub fn synth_signal(cfg: &SynthConfig) -> Result<Signal> {
    cfg.validate()?;
    let fs = cfg.sample_rate_hz;
    let samples = (0..cfg.n_samples())
        .map(|i| synth_value(cfg, i as f64 / fs))
        .collect();
    Signal::new(samples, fs)
}

/// `n` standard-normal draws from a ChaCha8 stream.
pub(crate) fn gaussian_noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn energy(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().map(|x| x * x))
}

/// Adds seeded Gaussian noise rescaled against its realized energy so the
/// resulting SNR equals `target_snr_db`.
pub fn add_noise_snr(signal: &Signal, target_snr_db: f64, seed: u64) -> Result<Signal> {
    if !target_snr_db.is_finite() {
        return Err(Error::input(format!(
            "target SNR must be finite, got {target_snr_db}"
        )));
    }
    let signal_energy = energy(signal.samples());
    if signal_energy == 0.0 {
        return Err(Error::input("cannot set an SNR for a zero-energy signal"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = gaussian_noise(signal.len(), &mut rng);
    let noise_energy = energy(&noise);
    let scale = (signal_energy / (10f64.powf(target_snr_db / 10.0) * noise_energy)).sqrt();
    let samples = signal
        .samples()
        .iter()
        .zip(&noise)
        .map(|(x, w)| x + scale * w)
        .collect();
    Signal::new(samples, signal.sample_rate_hz())
}

fn check_lengths(reference: &[f64], estimate: &[f64]) -> Result<()> {
    if reference.len() != estimate.len() {
        return Err(Error::input(format!(
            "length mismatch: reference has {} samples, estimate has {}",
            reference.len(),
            estimate.len()
        )));
    }
    Ok(())
}

/// Signal-to-noise ratio in dB of `estimate` against `reference`.
///
/// Returns `f64::INFINITY` when the two sequences are identical.
pub fn snr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    check_lengths(reference, estimate)?;
    let signal_energy = energy(reference);
    if signal_energy == 0.0 {
        return Err(Error::input("reference has zero energy"));
    }
    let err = compensated_sum(
        reference
            .iter()
            .zip(estimate)
            .map(|(x, y)| (x - y) * (x - y)),
    );
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal_energy / err).log10())
}

pub fn rmse(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    check_lengths(reference, estimate)?;
    if reference.is_empty() {
        return Err(Error::input("empty sequences"));
    }
    let err = compensated_sum(
        reference
            .iter()
            .zip(estimate)
            .map(|(x, y)| (x - y) * (x - y)),
    );
    Ok((err / reference.len() as f64).sqrt())
}

/// One-sided DFT magnitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies_hz: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    /// Index of the largest bin, optionally skipping DC.
    pub fn peak_bin(&self, skip_dc: bool) -> usize {
        let start = usize::from(skip_dc && self.magnitudes.len() > 1);
        let mut best = start;
        for (i, &m) in self.magnitudes.iter().enumerate().skip(start) {
            if m > self.magnitudes[best] {
                best = i;
            }
        }
        best
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.frequencies_hz.get(1).copied().unwrap_or(0.0)
    }
}

pub fn spectrum(samples: &[f64], fs: f64) -> Result<Spectrum> {
    let n = samples.len();
    if n < 8 {
        return Err(Error::input(format!(
            "spectrum needs at least 8 samples, got {n}"
        )));
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2 + 1;
    let frequencies_hz = (0..bins).map(|k| k as f64 * fs / n as f64).collect();
    let magnitudes = buf[..bins].iter().map(|c| c.norm()).collect();
    Ok(Spectrum {
        frequencies_hz,
        magnitudes,
    })
}

/// Frequency of the strongest non-DC bin.
pub fn dominant_frequency(samples: &[f64], fs: f64) -> Result<f64> {
    let spec = spectrum(samples, fs)?;
    Ok(spec.frequencies_hz[spec.peak_bin(true)])
}
