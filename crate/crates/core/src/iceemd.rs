//! Improved complete ensemble EMD with adaptive noise.
//!
//! Each stage adds scaled, mode-filtered copies of a fixed bank of white
//! noise realizations to the current residue, takes the local mean of every
//! noisy copy, and averages. The IMF is the drop between successive residues,
//! so the IMFs and the final residue always sum back to the input.
//!
//! Realization `i` of the bank depends only on `(seed, i)`, and ensemble
//! averages are reduced in index order with compensated summation, so the
//! output does not depend on how many worker threads ran the realizations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emd::{emd_samples, is_exhausted, local_mean, Decomposition, SiftConfig};
use crate::signals::gaussian_noise;
use crate::stats::{compensated_sum, std_pop};
use crate::{Error, Result, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Number of noise realizations averaged per stage.
    pub ensemble_size: usize,
    /// Noise amplitude relative to the std of the current residue.
    pub epsilon0: f64,
    pub seed: u64,
    pub max_modes: usize,
    pub sift: SiftConfig,
    /// Use raw white noise instead of its normalized first mode at stage one.
    pub first_stage_raw_noise: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 50,
            epsilon0: 0.2,
            seed: 0,
            max_modes: 12,
            sift: SiftConfig::default(),
            first_stage_raw_noise: false,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::config("ensemble_size must be at least 1"));
        }
        if !(self.epsilon0.is_finite() && self.epsilon0 > 0.0) {
            return Err(Error::config("epsilon0 must be positive"));
        }
        if self.max_modes == 0 {
            return Err(Error::config("max_modes must be at least 1"));
        }
        self.sift.validate()
    }
}

/// White noise realizations and their cached EMD modes.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBank {
    realizations: Vec<Vec<f64>>,
    /// `modes[i][k - 1]` is the k-th mode of realization `i`; shorter lists
    /// mean the decomposition ran out of modes.
    modes: Vec<Vec<Vec<f64>>>,
    len: usize,
}

impl NoiseBank {
    pub fn ensemble_size(&self) -> usize {
        self.realizations.len()
    }

    pub fn signal_len(&self) -> usize {
        self.len
    }

    pub fn realization(&self, i: usize) -> &[f64] {
        &self.realizations[i]
    }

    /// k-th mode (1-based) of realization `i`, or `None` when it has fewer.
    pub fn mode(&self, i: usize, k: usize) -> Option<&[f64]> {
        k.checked_sub(1)
            .and_then(|k| self.modes[i].get(k))
            .map(Vec::as_slice)
    }
}

/// Standard-normal sequence for realization `index` of the bank seeded with `seed`.
pub fn noise_realization(n: usize, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    gaussian_noise(n, &mut rng)
}

pub fn generate_noise_bank(n: usize, cfg: &EnsembleConfig) -> Result<NoiseBank> {
    if n < 4 {
        return Err(Error::input(format!(
            "noise bank needs at least 4 samples, got {n}"
        )));
    }
    cfg.validate()?;
    let built: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..cfg.ensemble_size)
        .into_par_iter()
        .map(|i| {
            let w = noise_realization(n, cfg.seed, i);
            let modes = emd_samples(&w, &cfg.sift, cfg.max_modes)?.imfs;
            Ok((w, modes))
        })
        .collect::<Result<_>>()?;
    let (realizations, modes) = built.into_iter().unzip();
    Ok(NoiseBank {
        realizations,
        modes,
        len: n,
    })
}

/// Index-ordered compensated mean of equal-length rows.
fn ensemble_mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows[0].len();
    let m = rows.len() as f64;
    (0..n)
        .map(|j| compensated_sum(rows.iter().map(|r| r[j])) / m)
        .collect()
}

/// `<M(base + beta * noise_i)>` over the bank; `noise_i = None` adds nothing.
fn averaged_local_mean<'a, F>(
    base: &[f64],
    beta: f64,
    bank: &'a NoiseBank,
    noise: F,
    sift: &SiftConfig,
) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Option<std::borrow::Cow<'a, [f64]>> + Sync,
{
    let rows: Vec<Vec<f64>> = (0..bank.ensemble_size())
        .into_par_iter()
        .map(|i| {
            let perturbed: Vec<f64> = match noise(i) {
                Some(w) => base.iter().zip(w.iter()).map(|(x, v)| x + beta * v).collect(),
                None => base.to_vec(),
            };
            local_mean(&perturbed, sift)
        })
        .collect::<Result<_>>()?;
    Ok(ensemble_mean(&rows))
}

pub fn iceemd(signal: &Signal, cfg: &EnsembleConfig) -> Result<Decomposition> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::input(format!(
            "decomposition needs at least 4 samples, got {n}"
        )));
    }
    let bank = generate_noise_bank(n, cfg)?;
    iceemd_with_bank(signal.samples(), cfg, &bank)
}

/// ICEEMD against a prebuilt noise bank (which must match `samples` in length).
pub fn iceemd_with_bank(
    samples: &[f64],
    cfg: &EnsembleConfig,
    bank: &NoiseBank,
) -> Result<Decomposition> {
    use std::borrow::Cow;

    cfg.validate()?;
    let n = samples.len();
    if n < 4 {
        return Err(Error::input(format!(
            "decomposition needs at least 4 samples, got {n}"
        )));
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::input(format!("non-finite sample at index {i}")));
    }
    if bank.signal_len() != n {
        return Err(Error::input(format!(
            "noise bank length {} does not match signal length {n}",
            bank.signal_len()
        )));
    }

    let mut imfs = Vec::new();
    let mut residue = samples.to_vec();
    for k in 1..=cfg.max_modes {
        if is_exhausted(&residue)? {
            break;
        }
        let beta = cfg.epsilon0 * std_pop(&residue);
        let next = if k == 1 {
            averaged_local_mean(
                &residue,
                beta,
                bank,
                |i| {
                    if cfg.first_stage_raw_noise {
                        return Some(Cow::Borrowed(bank.realization(i)));
                    }
                    let e1 = bank.mode(i, 1)?;
                    let s = std_pop(e1);
                    (s > 0.0).then(|| Cow::Owned(e1.iter().map(|v| v / s).collect()))
                },
                &cfg.sift,
            )?
        } else {
            averaged_local_mean(
                &residue,
                beta,
                bank,
                |i| bank.mode(i, k).map(Cow::Borrowed),
                &cfg.sift,
            )?
        };
        let imf = residue.iter().zip(&next).map(|(r, m)| r - m).collect();
        imfs.push(imf);
        residue = next;
    }
    Ok(Decomposition {
        imfs,
        residue,
        source_length: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emd::emd_samples;
    use crate::stats::{max_abs, mean};
    use std::f64::consts::TAU;

    fn small_cfg(m: usize, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            ensemble_size: m,
            seed,
            ..EnsembleConfig::default()
        }
    }

    fn rel_max_err(a: &[f64], b: &[f64]) -> f64 {
        let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        diff / max_abs(a).max(f64::MIN_POSITIVE)
    }

    fn test_signal(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / 500.0;
                (TAU * 7.0 * t).sin() + 0.5 * (TAU * 60.0 * t).sin() + 0.3 * t
            })
            .collect()
    }

    #[test]
    fn bank_is_deterministic() {
        let a = generate_noise_bank(1024, &small_cfg(2, 7)).unwrap();
        let b = generate_noise_bank(1024, &small_cfg(2, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bank_realizations_are_indexed_by_seed_and_position() {
        let big = generate_noise_bank(1024, &small_cfg(50, 7)).unwrap();
        let small = generate_noise_bank(1024, &small_cfg(20, 7)).unwrap();
        assert_eq!(big.realization(13), small.realization(13));
        assert_eq!(big.mode(13, 2), small.mode(13, 2));
        assert_ne!(big.realization(0), big.realization(1));
    }

    #[test]
    fn bank_statistics() {
        let n = 1024;
        let bank = generate_noise_bank(n, &small_cfg(10, 3)).unwrap();
        for i in 0..bank.ensemble_size() {
            let w = bank.realization(i);
            assert!(mean(w).abs() < 3.0 / (n as f64).sqrt());
            let s = std_pop(w);
            assert!((0.9..=1.1).contains(&s), "{s}");
        }
        assert!(bank.mode(0, 0).is_none());
        assert!(bank.mode(0, 1).is_some());
    }

    #[test]
    fn reconstruction_is_exact() {
        let x = test_signal(600);
        let s = Signal::new(x.clone(), 500.0).unwrap();
        let dec = iceemd(&s, &small_cfg(8, 1)).unwrap();
        assert!(!dec.imfs.is_empty());
        assert!(dec.imfs.len() <= 12);
        assert!(rel_max_err(&x, &dec.reconstruct()) < 1e-10);
    }

    #[test]
    fn vanishing_noise_matches_plain_emd() {
        let x = test_signal(600);
        let s = Signal::new(x.clone(), 500.0).unwrap();
        let cfg = EnsembleConfig {
            ensemble_size: 1,
            epsilon0: 1e-12,
            ..EnsembleConfig::default()
        };
        let ens = iceemd(&s, &cfg).unwrap();
        let plain = emd_samples(&x, &cfg.sift, cfg.max_modes).unwrap();
        assert_eq!(ens.imfs.len(), plain.imfs.len());
        for (a, b) in ens.imfs.iter().zip(&plain.imfs) {
            let err = a.iter().zip(b).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn output_scales_with_input() {
        let x = test_signal(400);
        let cfg = small_cfg(6, 2);
        let bank = generate_noise_bank(x.len(), &cfg).unwrap();
        let base = iceemd_with_bank(&x, &cfg, &bank).unwrap();
        let c = 3.5;
        let scaled_x: Vec<f64> = x.iter().map(|v| c * v).collect();
        let scaled = iceemd_with_bank(&scaled_x, &cfg, &bank).unwrap();
        assert_eq!(base.imfs.len(), scaled.imfs.len());
        for (a, b) in base.imfs.iter().zip(&scaled.imfs) {
            let want: Vec<f64> = a.iter().map(|v| c * v).collect();
            assert!(rel_max_err(&want, b) < 1e-6);
        }
        let want: Vec<f64> = base.residue.iter().map(|v| c * v).collect();
        assert!(rel_max_err(&want, &scaled.residue) < 1e-6);
    }

    #[test]
    fn thread_count_does_not_change_the_result() {
        let x = test_signal(500);
        let s = Signal::new(x, 500.0).unwrap();
        let cfg = small_cfg(12, 9);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| iceemd(&s, &cfg).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn monotone_input_has_no_modes() {
        let ramp: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let s = Signal::new(ramp.clone(), 1.0).unwrap();
        let dec = iceemd(&s, &small_cfg(4, 0)).unwrap();
        assert!(dec.imfs.is_empty());
        assert_eq!(dec.residue, ramp);
    }

    #[test]
    fn rejects_bad_input() {
        let s = Signal::new(vec![1.0, 2.0, 1.0], 1.0).unwrap();
        assert!(iceemd(&s, &EnsembleConfig::default()).is_err());
        let s = Signal::new(test_signal(64), 1.0).unwrap();
        let bad = EnsembleConfig {
            epsilon0: 0.0,
            ..EnsembleConfig::default()
        };
        assert!(matches!(iceemd(&s, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn raw_first_stage_noise_also_reconstructs() {
        let x = test_signal(400);
        let s = Signal::new(x.clone(), 500.0).unwrap();
        let cfg = EnsembleConfig {
            first_stage_raw_noise: true,
            ..small_cfg(5, 4)
        };
        let dec = iceemd(&s, &cfg).unwrap();
        assert!(rel_max_err(&x, &dec.reconstruct()) < 1e-10);
    }
}
