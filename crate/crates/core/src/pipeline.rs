//! ICEEMD-De: decompose, gate IMFs by approximate entropy, wavelet-denoise
//! the flagged ones, and sum everything back up.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apen::{apen_per_imf, ApEnConfig, ApEnReport};
use crate::emd::Decomposition;
use crate::iceemd::{iceemd, EnsembleConfig};
use crate::wavelet::{max_levels, wavelet_denoise, DenoiseConfig, SigmaEstimator};
use crate::{Error, Result, Signal};

/// Default entropy gate. Derived by [`calibrate_apen_threshold`] with the
/// default configuration; see `docs/calibration.md`.
pub const DEFAULT_APEN_THRESHOLD: f64 = 0.661_206_900_624_527_8;

/// Seed of the white-noise record used to derive [`DEFAULT_APEN_THRESHOLD`].
pub const CALIBRATION_NOISE_SEED: u64 = 1;

/// Denoising applied to flagged IMFs: the wavelet defaults with the noise
/// level taken from the IMF's own spread.
///
/// An IMF is band-limited, so its finest detail band is nearly empty unless
/// the IMF sits at the top of the spectrum; the MAD estimate then collapses
/// and the threshold never bites.
pub fn imf_denoise_default() -> DenoiseConfig {
    DenoiseConfig {
        sigma_estimator: SigmaEstimator::SignalStd,
        ..DenoiseConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub ensemble: EnsembleConfig,
    pub apen: ApEnConfig,
    /// IMFs with approximate entropy strictly above this are denoised.
    pub apen_threshold: f64,
    pub denoise: DenoiseConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ensemble: EnsembleConfig::default(),
            apen: ApEnConfig::default(),
            apen_threshold: DEFAULT_APEN_THRESHOLD,
            denoise: imf_denoise_default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        self.apen.validate()?;
        self.denoise.validate()?;
        if !self.apen_threshold.is_finite() {
            return Err(Error::config("apen_threshold must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoisedImf {
    /// 1-based IMF index.
    pub index: usize,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseResult {
    pub decomposition_raw: Decomposition,
    pub apen_report: ApEnReport,
    pub imfs_denoised: Vec<DenoisedImf>,
    pub output: Signal,
    pub denoised_indices: Vec<usize>,
}

impl DenoiseResult {
    /// IMFs after gating: denoised where flagged, original elsewhere.
    pub fn final_imfs(&self) -> Vec<Vec<f64>> {
        let mut imfs = self.decomposition_raw.imfs.clone();
        for d in &self.imfs_denoised {
            imfs[d.index - 1] = d.after.clone();
        }
        imfs
    }

    /// The gated IMFs with the raw residue, as a decomposition.
    pub fn denoised_decomposition(&self) -> Decomposition {
        Decomposition {
            imfs: self.final_imfs(),
            residue: self.decomposition_raw.residue.clone(),
            source_length: self.decomposition_raw.source_length,
        }
    }
}

/// Elementwise sum of `imfs` and `residue`.
pub fn reconstruct(imfs: &[Vec<f64>], residue: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, imf)) = imfs.iter().enumerate().find(|(_, v)| v.len() != residue.len()) {
        return Err(Error::input(format!(
            "IMF {} has {} samples, residue has {}",
            i + 1,
            imf.len(),
            residue.len()
        )));
    }
    let mut out = residue.to_vec();
    for imf in imfs {
        for (o, v) in out.iter_mut().zip(imf) {
            *o += v;
        }
    }
    Ok(out)
}

/// Wavelet denoising with the level count reduced to what `samples` supports.
pub(crate) fn denoise_with_fallback(samples: &[f64], cfg: &DenoiseConfig) -> Result<Vec<f64>> {
    let cap = max_levels(samples.len()).max(1);
    if cfg.levels <= cap {
        return wavelet_denoise(samples, cfg);
    }
    let mut reduced = cfg.clone();
    reduced.levels = cap;
    if let Some(sel) = &mut reduced.threshold_levels {
        sel.retain(|&l| l <= cap);
    }
    wavelet_denoise(samples, &reduced)
}

/// Runs the full gate-and-denoise pipeline on `signal`.
pub fn iceemd_de(signal: &Signal, cfg: &PipelineConfig) -> Result<DenoiseResult> {
    cfg.validate()?;
    let dec = iceemd(signal, &cfg.ensemble)?;
    let report = apen_per_imf(&dec, &cfg.apen, cfg.apen_threshold)?;
    let imfs_denoised: Vec<DenoisedImf> = report
        .flagged
        .par_iter()
        .map(|&index| {
            let before = dec.imfs[index - 1].clone();
            let after = denoise_with_fallback(&before, &cfg.denoise)?;
            Ok(DenoisedImf {
                index,
                before,
                after,
            })
        })
        .collect::<Result<_>>()?;

    let mut result = DenoiseResult {
        denoised_indices: report.flagged.clone(),
        decomposition_raw: dec,
        apen_report: report,
        imfs_denoised,
        output: Signal::new(Vec::new(), signal.sample_rate_hz())?,
    };
    let summed = reconstruct(&result.final_imfs(), &result.decomposition_raw.residue)?;
    result.output = Signal::new(summed, signal.sample_rate_hz())?;
    Ok(result)
}

/// Inputs and outcome of the entropy-gate calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Entropies of the clean-signal IMFs that carry a tone.
    pub tone_imf_apen: Vec<f64>,
    /// Entropies of the white-noise IMFs treated as noise-dominated.
    pub noise_imf_apen: Vec<f64>,
    /// Dominant frequency of every clean IMF.
    pub clean_imf_freqs_hz: Vec<f64>,
    /// Dominant frequency of every white-noise IMF.
    pub noise_imf_freqs_hz: Vec<f64>,
    pub max_tone: f64,
    pub min_noise: f64,
    /// Midpoint of the gap.
    pub threshold: f64,
}

fn dominant_freqs(imfs: &[Vec<f64>], fs: f64) -> Result<(Vec<f64>, f64)> {
    use crate::signals::spectrum;
    let mut bin = 0.0;
    let freqs = imfs
        .iter()
        .map(|imf| {
            let spec = spectrum(imf, fs)?;
            bin = spec.bin_width_hz();
            Ok(spec.frequencies_hz[spec.peak_bin(true)])
        })
        .collect::<Result<_>>()?;
    Ok((freqs, bin))
}

/// Places the entropy gate halfway between the most irregular tone-bearing
/// IMF of `clean` and the most regular noise-dominated IMF of `noise`.
///
/// A clean IMF is tone-bearing when its dominant frequency is within one
/// bin of one of `tone_freqs_hz`. A noise IMF is noise-dominated when its
/// dominant frequency lies more than one bin above every tone, i.e. in the
/// band that carries only noise once the two are mixed.
pub fn calibrate_apen_threshold(
    clean: &Signal,
    tone_freqs_hz: &[f64],
    noise: &Signal,
    ensemble: &EnsembleConfig,
    apen: &ApEnConfig,
) -> Result<Calibration> {
    let clean_dec = iceemd(clean, ensemble)?;
    let clean_report = apen_per_imf(&clean_dec, apen, f64::INFINITY)?;
    let (clean_imf_freqs_hz, bin) = dominant_freqs(&clean_dec.imfs, clean.sample_rate_hz())?;
    let tone_imf_apen: Vec<f64> = clean_imf_freqs_hz
        .iter()
        .zip(&clean_report.per_imf)
        .filter(|(peak, _)| tone_freqs_hz.iter().any(|f| (*peak - f).abs() <= bin + 1e-9))
        .map(|(_, e)| e.apen)
        .collect();

    let noise_dec = iceemd(noise, ensemble)?;
    let noise_report = apen_per_imf(&noise_dec, apen, f64::INFINITY)?;
    let (noise_imf_freqs_hz, noise_bin) = dominant_freqs(&noise_dec.imfs, noise.sample_rate_hz())?;
    let top_tone = tone_freqs_hz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let noise_imf_apen: Vec<f64> = noise_imf_freqs_hz
        .iter()
        .zip(&noise_report.per_imf)
        .filter(|(peak, _)| **peak > top_tone + noise_bin + 1e-9)
        .map(|(_, e)| e.apen)
        .collect();

    if tone_imf_apen.is_empty() || noise_imf_apen.is_empty() {
        return Err(Error::input(
            "calibration needs at least one tone-bearing IMF and one noise IMF",
        ));
    }
    let max_tone = tone_imf_apen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_noise = noise_imf_apen.iter().copied().fold(f64::INFINITY, f64::min);
    if max_tone >= min_noise {
        return Err(Error::input(format!(
            "no entropy gap: tone IMFs reach {max_tone}, noise IMFs go down to {min_noise}"
        )));
    }
    Ok(Calibration {
        tone_imf_apen,
        noise_imf_apen,
        clean_imf_freqs_hz,
        noise_imf_freqs_hz,
        max_tone,
        min_noise,
        threshold: 0.5 * (max_tone + min_noise),
    })
}
