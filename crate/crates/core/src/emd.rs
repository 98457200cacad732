//! Plain empirical mode decomposition.
//!
//! Sifting subtracts the mean of cubic-spline envelopes through the local
//! maxima and minima until the candidate passes the stop rule. The two
//! operators used by the ensemble recursion live here too:
//! [`mode_operator`] (the k-th mode) and [`local_mean`] (input minus its
//! first mode).

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Signal};

/// Sifting controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftConfig {
    /// Stop once `sum((h_prev - h)^2) / sum(h_prev^2)` falls below this.
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    /// Extrema mirrored beyond each end before envelope fitting.
    pub boundary_extrema_count: usize,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            sd_threshold: 0.2,
            max_sift_iterations: 100,
            boundary_extrema_count: 2,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sd_threshold.is_finite() && self.sd_threshold > 0.0) {
            return Err(Error::config("sd_threshold must be positive"));
        }
        if self.max_sift_iterations == 0 {
            return Err(Error::config("max_sift_iterations must be at least 1"));
        }
        if self.boundary_extrema_count == 0 {
            return Err(Error::config("boundary_extrema_count must be at least 1"));
        }
        Ok(())
    }
}

/// IMFs (highest frequency first) plus the final residue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
    pub source_length: usize,
}

impl Decomposition {
    pub fn n_imfs(&self) -> usize {
        self.imfs.len()
    }

    /// Elementwise sum of all IMFs and the residue.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }
}

/// Indices of strict local extrema, ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extrema {
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
}

impl Extrema {
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }
}

/// Finds interior local maxima and minima.
///
/// A plateau of equal values flanked on both sides by lower (higher)
/// neighbours is reported once, at its middle index (left-middle for an
/// even-length plateau). Plateaus that touch either end are not extrema.
pub fn find_extrema(samples: &[f64]) -> Result<Extrema> {
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::input(format!("non-finite sample at index {i}")));
    }
    let mut out = Extrema::default();
    let n = samples.len();
    if n < 3 {
        return Ok(out);
    }
    let mut start = 1;
    while start < n - 1 {
        let v = samples[start];
        let mut end = start;
        while end + 1 < n && samples[end + 1] == v {
            end += 1;
        }
        if end == n - 1 {
            break;
        }
        let prev = samples[start - 1];
        let next = samples[end + 1];
        let mid = start + (end - start) / 2;
        if prev < v && next < v {
            out.maxima.push(mid);
        } else if prev > v && next > v {
            out.minima.push(mid);
        }
        start = end + 1;
    }
    Ok(out)
}

/// Sign changes, ignoring exact zeros between samples of opposite sign.
pub fn zero_crossings(samples: &[f64]) -> usize {
    let mut count = 0;
    let mut last_sign = 0.0_f64;
    for &x in samples {
        if x == 0.0 {
            continue;
        }
        let s = x.signum();
        if last_sign != 0.0 && s != last_sign {
            count += 1;
        }
        last_sign = s;
    }
    count
}

/// The extrema / zero-crossing count test (difference at most one).
pub fn is_imf(samples: &[f64]) -> bool {
    match find_extrema(samples) {
        Ok(ext) => ext.count().abs_diff(zero_crossings(samples)) <= 1,
        Err(_) => false,
    }
}

/// Natural cubic spline through `(xs, ys)` evaluated at `0, 1, .., n-1`.
///
/// `xs` must be strictly increasing with at least two knots; two knots give
/// the straight line through them.
fn natural_spline_on_grid(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    let m = xs.len();
    debug_assert!(m >= 2 && ys.len() == m);
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();

    // Second derivatives at the knots; zero at both ends.
    let mut second = vec![0.0; m];
    if m > 2 {
        let inner = m - 2;
        let mut diag = vec![0.0; inner];
        let mut rhs = vec![0.0; inner];
        for i in 0..inner {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
        }
        // Thomas algorithm; sub- and super-diagonals are h[i+1].
        for i in 1..inner {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        second[inner] = rhs[inner - 1] / diag[inner - 1];
        for i in (0..inner - 1).rev() {
            second[i + 1] = (rhs[i] - h[i + 1] * second[i + 2]) / diag[i];
        }
    }

    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for t in 0..n {
        let x = t as f64;
        while seg + 2 < m && x > xs[seg + 1] {
            seg += 1;
        }
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let hs = h[seg];
        let a = (x1 - x) / hs;
        let b = (x - x0) / hs;
        let y = a * ys[seg]
            + b * ys[seg + 1]
            + ((a * a * a - a) * second[seg] + (b * b * b - b) * second[seg + 1]) * hs * hs / 6.0;
        out.push(y);
    }
    out
}

/// Knots for one envelope: the extrema themselves plus up to `count`
/// extrema reflected about each end sample.
fn mirrored_knots(samples: &[f64], idx: &[usize], count: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let last = (n - 1) as f64;
    let k = count.min(idx.len());
    let mut xs = Vec::with_capacity(idx.len() + 2 * k);
    let mut ys = Vec::with_capacity(idx.len() + 2 * k);
    for &i in idx[..k].iter().rev() {
        xs.push(-(i as f64));
        ys.push(samples[i]);
    }
    for &i in idx {
        xs.push(i as f64);
        ys.push(samples[i]);
    }
    for &i in idx[idx.len() - k..].iter().rev() {
        xs.push(2.0 * last - i as f64);
        ys.push(samples[i]);
    }
    (xs, ys)
}

/// Indices reflected beyond one end, for each envelope, and the axis.
struct EndMirror {
    maxima: Vec<usize>,
    minima: Vec<usize>,
    axis: usize,
}

/// Picks the reflection for the left end of `samples`.
///
/// The axis is the first extremum, so the mirrored sequence keeps
/// alternating; when the end sample overshoots that extremum's neighbour of
/// the other kind, the end sample itself becomes a knot and the axis. If the
/// reflected knots would not reach past the end, the plain reflection about
/// the end sample is used instead.
fn left_mirror(samples: &[f64], maxima: &[usize], minima: &[usize], count: usize) -> EndMirror {
    let first = |v: &[usize], k: usize| v[..k.min(v.len())].to_vec();
    let with_end = |v: &[usize]| {
        let mut out = vec![0];
        out.extend(first(v, count.saturating_sub(1)));
        out
    };
    let starts_with_max = maxima[0] < minima[0];
    let mut m = if starts_with_max {
        if samples[0] > samples[minima[0]] {
            EndMirror {
                maxima: first(&maxima[1..], count),
                minima: first(minima, count),
                axis: maxima[0],
            }
        } else {
            EndMirror {
                maxima: first(maxima, count),
                minima: with_end(minima),
                axis: 0,
            }
        }
    } else if samples[0] < samples[maxima[0]] {
        EndMirror {
            maxima: first(maxima, count),
            minima: first(&minima[1..], count),
            axis: minima[0],
        }
    } else {
        EndMirror {
            maxima: with_end(maxima),
            minima: first(minima, count),
            axis: 0,
        }
    };
    let outside = |v: &[usize], axis: usize| v.is_empty() || v.iter().max().is_some_and(|&i| i >= 2 * axis);
    if m.axis != 0 && !(outside(&m.maxima, m.axis) && outside(&m.minima, m.axis)) {
        if starts_with_max {
            m.maxima = first(maxima, count);
        } else {
            m.minima = first(minima, count);
        }
        m.axis = 0;
    }
    m
}

/// Knots for both envelopes, with `count` extrema of each kind reflected
/// beyond each end.
#[allow(clippy::type_complexity)]
fn envelope_knots(
    samples: &[f64],
    extrema: &Extrema,
    count: usize,
) -> ((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>)) {
    let (maxima, minima) = (&extrema.maxima, &extrema.minima);
    if maxima.is_empty() || minima.is_empty() {
        return (
            mirrored_knots(samples, maxima, count),
            mirrored_knots(samples, minima, count),
        );
    }
    let n = samples.len();
    let left = left_mirror(samples, maxima, minima, count);
    // The right end is the left end of the time-reversed series.
    let rev: Vec<f64> = samples.iter().rev().copied().collect();
    let flip = |v: &[usize]| -> Vec<usize> { v.iter().rev().map(|&i| n - 1 - i).collect() };
    let right = left_mirror(&rev, &flip(maxima), &flip(minima), count);

    let build = |own: &[usize], l: &[usize], r: &[usize]| {
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(own.len() + l.len() + r.len());
        for &i in l {
            knots.push(((2 * left.axis) as f64 - i as f64, samples[i]));
        }
        for &i in own {
            knots.push((i as f64, samples[i]));
        }
        for &j in r {
            // j indexes the reversed series.
            let i = n - 1 - j;
            let axis = (n - 1 - right.axis) as f64;
            knots.push((2.0 * axis - i as f64, samples[i]));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        knots.dedup_by(|a, b| a.0 == b.0);
        knots.into_iter().unzip()
    };
    (
        build(maxima, &left.maxima, &right.maxima),
        build(minima, &left.minima, &right.minima),
    )
}

/// Mean of the upper and lower cubic-spline envelopes.
pub fn mean_envelope(samples: &[f64], extrema: &Extrema, cfg: &SiftConfig) -> Result<Vec<f64>> {
    let n = samples.len();
    let ((ux, uy), (lx, ly)) = envelope_knots(samples, extrema, cfg.boundary_extrema_count);
    if ux.len() < 2 || lx.len() < 2 {
        return Err(Error::NotEnoughExtrema {
            maxima: extrema.maxima.len(),
            minima: extrema.minima.len(),
        });
    }
    let upper = natural_spline_on_grid(&ux, &uy, n);
    let lower = natural_spline_on_grid(&lx, &ly, n);
    Ok(upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect())
}

/// Sifts one IMF out of `samples`; returns `(imf, samples - imf)`.
///
/// Sifting stops when the normalized squared change drops below
/// `sd_threshold` and the candidate passes [`is_imf`], when the iteration cap
/// is hit, or when a later iterate no longer has envelopes (the current
/// candidate is kept).
pub fn extract_imf(samples: &[f64], cfg: &SiftConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut h = samples.to_vec();
    for iter in 0..cfg.max_sift_iterations {
        let ext = find_extrema(&h)?;
        let mean = match mean_envelope(&h, &ext, cfg) {
            Ok(m) => m,
            Err(e) if iter == 0 => return Err(e),
            Err(_) => break,
        };
        let prev_energy: f64 = h.iter().map(|v| v * v).sum();
        let change: f64 = mean.iter().map(|v| v * v).sum();
        for (hv, mv) in h.iter_mut().zip(&mean) {
            *hv -= mv;
        }
        let sd = if prev_energy > 0.0 {
            change / prev_energy
        } else {
            0.0
        };
        if sd < cfg.sd_threshold && is_imf(&h) {
            break;
        }
    }
    let residue = samples.iter().zip(&h).map(|(x, v)| x - v).collect();
    Ok((h, residue))
}

fn check_decomposable_length(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::input(format!(
            "decomposition needs at least 4 samples, got {n}"
        )));
    }
    Ok(())
}

/// True when the sequence has too few extrema to carry another mode
/// (fewer than three, which includes every monotone sequence).
pub(crate) fn is_exhausted(samples: &[f64]) -> Result<bool> {
    Ok(find_extrema(samples)?.count() < 3)
}

/// EMD on raw samples; see [`emd`].
pub fn emd_samples(samples: &[f64], cfg: &SiftConfig, max_modes: usize) -> Result<Decomposition> {
    check_decomposable_length(samples.len())?;
    cfg.validate()?;
    if max_modes == 0 {
        return Err(Error::config("max_modes must be at least 1"));
    }
    let mut imfs = Vec::new();
    let mut residue = samples.to_vec();
    while imfs.len() < max_modes {
        if is_exhausted(&residue)? {
            break;
        }
        match extract_imf(&residue, cfg) {
            Ok((imf, rest)) => {
                imfs.push(imf);
                residue = rest;
            }
            Err(Error::NotEnoughExtrema { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(Decomposition {
        imfs,
        residue,
        source_length: samples.len(),
    })
}

/// Repeated IMF extraction on successive residues, stopping when the residue
/// has fewer than three extrema or `max_modes` IMFs have been taken.
pub fn emd(signal: &Signal, cfg: &SiftConfig, max_modes: usize) -> Result<Decomposition> {
    emd_samples(signal.samples(), cfg, max_modes)
}

/// The k-th EMD mode (1-based), or zeros when fewer than `k` modes exist.
pub fn mode_operator(samples: &[f64], k: usize, cfg: &SiftConfig) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::input("mode index is 1-based"));
    }
    let mut dec = emd_samples(samples, cfg, k)?;
    Ok(if dec.imfs.len() >= k {
        dec.imfs.swap_remove(k - 1)
    } else {
        vec![0.0; samples.len()]
    })
}

/// `x - E1(x)`, or `x` itself when no mode can be extracted.
pub fn local_mean(samples: &[f64], cfg: &SiftConfig) -> Result<Vec<f64>> {
    check_decomposable_length(samples.len())?;
    if is_exhausted(samples)? {
        return Ok(samples.to_vec());
    }
    match extract_imf(samples, cfg) {
        Ok((_, rest)) => Ok(rest),
        Err(Error::NotEnoughExtrema { .. }) => Ok(samples.to_vec()),
        Err(e) => Err(e),
    }
}
