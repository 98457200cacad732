//! Approximate entropy with embedding dimension 2.
//!
//! Two samples "match" when they differ by less than the tolerance `a`. A
//! pair of length-2 templates matches when both aligned sample pairs match,
//! which is the AND of two adjacent entries on a diagonal of the binary
//! distance matrix; length-3 templates AND three entries. Self-matches count,
//! so every template matches at least itself.

use serde::{Deserialize, Serialize};

use crate::emd::Decomposition;
use crate::stats::std_pop;
use crate::{Error, Result};

/// Embedding dimension; the statistic compares length-2 and length-3 templates.
pub const EMBEDDING_M: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApEnConfig {
    /// `a = tolerance_factor * std(series)`; meaningful range is 0.1..=0.2.
    pub tolerance_factor: f64,
    /// Fixed tolerance `a`, overriding the relative one.
    pub absolute_tolerance: Option<f64>,
    /// In [`apen_per_imf`], the spread an IMF's tolerance is scaled by is at
    /// least this fraction of the decomposed signal's std, so IMFs of
    /// negligible amplitude read as regular instead of as magnified noise.
    /// Zero disables the floor.
    pub imf_spread_floor: f64,
}

impl Default for ApEnConfig {
    fn default() -> Self {
        Self {
            tolerance_factor: 0.15,
            absolute_tolerance: None,
            imf_spread_floor: 0.1,
        }
    }
}

impl ApEnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.imf_spread_floor.is_finite() && self.imf_spread_floor >= 0.0) {
            return Err(Error::config(format!(
                "imf_spread_floor must be finite and nonnegative, got {}",
                self.imf_spread_floor
            )));
        }
        if let Some(a) = self.absolute_tolerance {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidTolerance(a));
            }
            return Ok(());
        }
        if !(self.tolerance_factor.is_finite() && self.tolerance_factor > 0.0) {
            return Err(Error::InvalidTolerance(self.tolerance_factor));
        }
        if !(0.1..=0.2).contains(&self.tolerance_factor) {
            log::warn!(
                "tolerance_factor {} is outside the usual 0.1..=0.2 range",
                self.tolerance_factor
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImfEntropy {
    /// 1-based IMF index.
    pub imf_index: usize,
    pub apen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApEnReport {
    pub per_imf: Vec<ImfEntropy>,
    pub threshold: f64,
    /// 1-based indices of IMFs whose entropy exceeds `threshold`.
    pub flagged: Vec<usize>,
}

/// Dense boolean matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl BinaryMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.bits.chunks(self.n)
    }
}

/// `b[i][j] = |z_i - z_j| < a`, strict.
pub fn binary_distance_matrix(series: &[f64], a: f64) -> Result<BinaryMatrix> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidTolerance(a));
    }
    let n = series.len();
    let mut bits = Vec::with_capacity(n * n);
    for &zi in series {
        bits.extend(series.iter().map(|&zj| (zi - zj).abs() < a));
    }
    Ok(BinaryMatrix { n, bits })
}

/// Resolved tolerance `a` for `series`.
pub fn tolerance(series: &[f64], cfg: &ApEnConfig) -> f64 {
    cfg.absolute_tolerance
        .unwrap_or_else(|| cfg.tolerance_factor * std_pop(series))
}

/// Approximate entropy `Phi_2 - Phi_3` of `series` (at least 10 samples).
///
/// Returns 0 for a constant series under a relative tolerance.
pub fn approximate_entropy(series: &[f64], cfg: &ApEnConfig) -> Result<f64> {
    cfg.validate()?;
    let n = series.len();
    if n < 10 {
        return Err(Error::input(format!(
            "approximate entropy needs at least 10 samples, got {n}"
        )));
    }
    if let Some(i) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::input(format!("non-finite sample at index {i}")));
    }
    let a = tolerance(series, cfg);
    if a == 0.0 {
        return Ok(0.0);
    }

    // counts2[i]: matches of the length-2 template at i (i < n-1);
    // counts3[i]: matches of the length-3 template at i (i < n-2).
    let mut counts2 = vec![0u32; n - 1];
    let mut counts3 = vec![0u32; n - 2];
    let close = |i: usize, j: usize| (series[i] - series[j]).abs() < a;
    for i in 0..n - 1 {
        for j in i..n - 1 {
            if !(close(i, j) && close(i + 1, j + 1)) {
                continue;
            }
            let both = i != j;
            counts2[i] += 1;
            if both {
                counts2[j] += 1;
            }
            if i < n - 2 && j < n - 2 && close(i + 2, j + 2) {
                counts3[i] += 1;
                if both {
                    counts3[j] += 1;
                }
            }
        }
    }

    let phi = |counts: &[u32]| {
        let len = counts.len() as f64;
        counts
            .iter()
            .map(|&c| (f64::from(c) / len).ln())
            .sum::<f64>()
            / len
    };
    Ok(phi(&counts2) - phi(&counts3))
}

/// Entropy of every IMF (residue excluded); flags those above `threshold`.
///
/// Each IMF's tolerance is `tolerance_factor` times the larger of its own
/// std and `imf_spread_floor` times the std of the decomposed signal.
pub fn apen_per_imf(dec: &Decomposition, cfg: &ApEnConfig, threshold: f64) -> Result<ApEnReport> {
    use rayon::prelude::*;

    cfg.validate()?;
    let floor = cfg.imf_spread_floor * std_pop(&dec.reconstruct());
    let values: Vec<f64> = dec
        .imfs
        .par_iter()
        .map(|imf| {
            let a = match cfg.absolute_tolerance {
                Some(a) => a,
                None => cfg.tolerance_factor * std_pop(imf).max(floor),
            };
            if a > 0.0 {
                let fixed = ApEnConfig {
                    absolute_tolerance: Some(a),
                    ..*cfg
                };
                approximate_entropy(imf, &fixed)
            } else {
                approximate_entropy(imf, cfg)
            }
        })
        .collect::<Result<_>>()?;
    let per_imf: Vec<ImfEntropy> = values
        .into_iter()
        .enumerate()
        .map(|(i, apen)| ImfEntropy {
            imf_index: i + 1,
            apen,
        })
        .collect();
    let flagged = per_imf
        .iter()
        .filter(|e| e.apen > threshold)
        .map(|e| e.imf_index)
        .collect();
    Ok(ApEnReport {
        per_imf,
        threshold,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::gaussian_noise;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    /// Template-vector ApEn: Chebyshev distance between explicit length-m
    /// windows, counted over every window pair.
    fn template_oracle(z: &[f64], a: f64) -> f64 {
        let n = z.len();
        let phi = |m: usize| {
            let count = n - m + 1;
            let mut total = 0.0;
            for i in 0..count {
                let hits = (0..count)
                    .filter(|&j| (0..m).map(|k| (z[i + k] - z[j + k]).abs()).fold(0.0, f64::max) < a)
                    .count();
                total += (hits as f64 / count as f64).ln();
            }
            total / count as f64
        };
        phi(2) - phi(3)
    }

    fn pop_std(z: &[f64]) -> f64 {
        let m = z.iter().sum::<f64>() / z.len() as f64;
        (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / z.len() as f64).sqrt()
    }

    #[test]
    fn matrix_small_case() {
        let b = binary_distance_matrix(&[0.0, 10.0, 0.0], 1.0).unwrap();
        let rows: Vec<Vec<bool>> = b.rows().map(<[bool]>::to_vec).collect();
        assert_eq!(
            rows,
            vec![
                vec![true, false, true],
                vec![false, true, false],
                vec![true, false, true]
            ]
        );
    }

    #[test]
    fn matrix_constant_and_errors() {
        let b = binary_distance_matrix(&[2.0; 6], 0.01).unwrap();
        assert!(b.rows().all(|r| r.iter().all(|&v| v)));
        assert!(matches!(
            binary_distance_matrix(&[1.0, 2.0], 0.0),
            Err(Error::InvalidTolerance(_))
        ));
        // Ties at exactly `a` are not matches.
        let b = binary_distance_matrix(&[0.0, 1.0], 1.0).unwrap();
        assert!(!b.get(0, 1));
    }

    #[test]
    fn matrix_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let z = gaussian_noise(20, &mut rng);
            let b = binary_distance_matrix(&z, 0.3).unwrap();
            for i in 0..b.size() {
                assert!(b.get(i, i));
                for j in 0..b.size() {
                    assert_eq!(b.get(i, j), b.get(j, i));
                }
            }
        }
    }

    #[test]
    fn constant_series_has_zero_entropy() {
        assert_eq!(approximate_entropy(&[4.2; 50], &ApEnConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn period_two_matches_oracle() {
        let z: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let cfg = ApEnConfig::default();
        let got = approximate_entropy(&z, &cfg).unwrap();
        let want = template_oracle(&z, 0.15 * pop_std(&z));
        assert!((got - want).abs() < 1e-12);
        // Closed form: 50 odd-phase and 49 even-phase length-2 templates,
        // 49 of each phase among length-3 templates.
        let closed = (50.0 * (50.0f64 / 99.0).ln() + 49.0 * (49.0f64 / 99.0).ln()) / 99.0
            - (0.5f64).ln();
        assert!((got - closed).abs() < 1e-12);
    }

    #[test]
    fn noise_is_less_regular_than_a_sine() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let noise = gaussian_noise(1000, &mut rng);
        let sine: Vec<f64> = (0..1000).map(|i| (TAU * 20.0 * i as f64 / 1000.0).sin()).collect();
        let cfg = ApEnConfig::default();
        let a_noise = approximate_entropy(&noise, &cfg).unwrap();
        let a_sine = approximate_entropy(&sine, &cfg).unwrap();
        assert!(a_sine >= 0.0);
        assert!(a_noise > a_sine, "{a_noise} vs {a_sine}");
    }

    #[test]
    fn regular_series_are_nonnegative() {
        let cfg = ApEnConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for seed_len in [200usize, 500, 1000] {
            let noise = gaussian_noise(seed_len, &mut rng);
            assert!(approximate_entropy(&noise, &cfg).unwrap() >= 0.0);
            let sine: Vec<f64> = (0..seed_len).map(|i| (TAU * i as f64 / 37.0).sin()).collect();
            assert!(approximate_entropy(&sine, &cfg).unwrap() >= 0.0);
        }
    }

    #[test]
    fn only_self_matches_go_negative() {
        // Every template matches only itself: Phi_2 = ln(1/(n-1)),
        // Phi_3 = ln(1/(n-2)).
        let z = [0.0, 10.0, 30.0, 60.0, 100.0, 150.0, 210.0, 280.0, 360.0, 450.0];
        let cfg = ApEnConfig {
            absolute_tolerance: Some(1.0),
            ..ApEnConfig::default()
        };
        let got = approximate_entropy(&z, &cfg).unwrap();
        assert!((got - (8.0f64 / 9.0).ln()).abs() < 1e-12);
        assert!(got < 0.0);
    }

    #[test]
    fn rejects_short_series() {
        assert!(approximate_entropy(&[1.0; 9], &ApEnConfig::default()).is_err());
    }

    #[test]
    fn absolute_tolerance_override() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z = gaussian_noise(60, &mut rng);
        let cfg = ApEnConfig {
            absolute_tolerance: Some(0.4),
            ..ApEnConfig::default()
        };
        let got = approximate_entropy(&z, &cfg).unwrap();
        assert!((got - template_oracle(&z, 0.4)).abs() < 1e-12);
        let bad = ApEnConfig {
            absolute_tolerance: Some(-1.0),
            ..ApEnConfig::default()
        };
        assert!(approximate_entropy(&z, &bad).is_err());
    }

    #[test]
    fn per_imf_report() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy = gaussian_noise(64, &mut rng);
        let dec = Decomposition {
            imfs: vec![noisy, vec![1.0; 64]],
            residue: vec![0.0; 64],
            source_length: 64,
        };
        let cfg = ApEnConfig::default();
        let report = apen_per_imf(&dec, &cfg, 0.05).unwrap();
        assert_eq!(report.per_imf[1].apen, 0.0);
        assert_eq!(report.flagged, vec![1]);
        let all = apen_per_imf(&dec, &cfg, -1.0).unwrap();
        assert_eq!(all.flagged, vec![1, 2]);
    }

    #[test]
    fn spread_floor_quiets_negligible_imfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let faint: Vec<f64> = gaussian_noise(200, &mut rng).iter().map(|v| 1e-3 * v).collect();
        let loud: Vec<f64> = (0..200).map(|i| 3.0 * (TAU * i as f64 / 25.0).sin()).collect();
        let dec = Decomposition {
            imfs: vec![faint.clone(), loud.clone()],
            residue: vec![0.0; 200],
            source_length: 200,
        };
        let source: Vec<f64> = faint.iter().zip(&loud).map(|(a, b)| a + b).collect();
        let cfg = ApEnConfig::default();
        let floored = apen_per_imf(&dec, &cfg, f64::INFINITY).unwrap();
        let a = cfg.tolerance_factor * cfg.imf_spread_floor * std_pop(&source);
        assert!((floored.per_imf[0].apen - template_oracle(&faint, a)).abs() < 1e-12);
        assert!(floored.per_imf[0].apen < 1e-9);
        let a_loud = cfg.tolerance_factor * std_pop(&loud);
        assert!((floored.per_imf[1].apen - template_oracle(&loud, a_loud)).abs() < 1e-12);

        let off = ApEnConfig {
            imf_spread_floor: 0.0,
            ..cfg
        };
        let plain = apen_per_imf(&dec, &off, f64::INFINITY).unwrap();
        let own = approximate_entropy(&faint, &cfg).unwrap();
        assert!((plain.per_imf[0].apen - own).abs() < 1e-12);
        assert!(own > 0.5, "{own}");
        let bad = ApEnConfig {
            imf_spread_floor: -0.1,
            ..cfg
        };
        assert!(apen_per_imf(&dec, &bad, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scale_invariant(
            z in proptest::collection::vec(-5.0f64..5.0, 10..120),
            c in 0.01f64..100.0,
        ) {
            let cfg = ApEnConfig::default();
            let a = approximate_entropy(&z, &cfg).unwrap();
            let scaled: Vec<f64> = z.iter().map(|v| c * v).collect();
            let b = approximate_entropy(&scaled, &cfg).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
