//! CSV and JSON file formats.
//!
//! Signal CSV: `# key=value` comment lines carry the metadata, followed by
//! one amplitude per row or `t,amplitude` rows, optionally under a column
//! header of exactly those names. `sample_rate_hz` or `sample_interval_s`
//! must be given; both are accepted only when they agree within 0.1%.
//! Optional keys are `n_samples` (checked against the row count) and
//! `label`. Other keys are ignored.
//!
//! Decomposition CSV: the same comment block, then the header
//! `t,imf1,..,imfK,residue` and one row per sample. Values are written with
//! 17 significant digits, which reads back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::apen::ApEnReport;
use crate::emd::Decomposition;
use crate::{Error, Result, Signal};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CSV_FORMAT_VERSION: u32 = 1;
pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Relative tolerance for rate/interval agreement and time-column spacing.
pub const SPACING_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalFileHeader {
    pub sample_rate_hz: Option<f64>,
    pub sample_interval_s: Option<f64>,
    pub n_samples: Option<usize>,
    pub label: Option<String>,
}

impl SignalFileHeader {
    /// Sample rate implied by the header.
    pub fn resolved_rate(&self) -> Result<f64> {
        match (self.sample_rate_hz, self.sample_interval_s) {
            (None, None) => Err(Error::format(
                None,
                "missing sample_rate_hz or sample_interval_s metadata",
            )),
            (Some(rate), None) => Ok(rate),
            (None, Some(dt)) => Ok(1.0 / dt),
            (Some(rate), Some(dt)) => {
                let implied = 1.0 / dt;
                if (rate - implied).abs() > SPACING_TOLERANCE * rate {
                    Err(Error::format(
                        None,
                        format!(
                            "sample_rate_hz={rate} contradicts sample_interval_s={dt} \
                             (implies {implied} Hz); give exactly one"
                        ),
                    ))
                } else {
                    Ok(rate)
                }
            }
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_error(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_error(path))
}

fn parse_positive(key: &str, value: &str, line: usize) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(Error::format(
            Some(line),
            format!("{key} must be a positive number, got {value:?}"),
        )),
    }
}

/// 1-based line number, key, value.
type MetaLine = (usize, String, String);

/// `# key=value` lines, in file order.
fn metadata(text: &str) -> Vec<MetaLine> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let body = line.trim_start().strip_prefix('#')?;
            let (k, v) = body.split_once('=')?;
            Some((i + 1, k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn parse_header(text: &str) -> Result<(SignalFileHeader, Vec<MetaLine>)> {
    let meta = metadata(text);
    let mut header = SignalFileHeader::default();
    for (line, key, value) in &meta {
        match key.as_str() {
            "sample_rate_hz" => header.sample_rate_hz = Some(parse_positive(key, value, *line)?),
            "sample_interval_s" => {
                header.sample_interval_s = Some(parse_positive(key, value, *line)?)
            }
            "n_samples" => {
                header.n_samples = Some(value.parse().map_err(|_| {
                    Error::format(
                        Some(*line),
                        format!("n_samples must be a nonnegative integer, got {value:?}"),
                    )
                })?)
            }
            "label" => header.label = Some(value.clone()),
            _ => {}
        }
    }
    Ok((header, meta))
}

struct Table {
    header: Option<Vec<String>>,
    /// `(line, values)` per data row.
    rows: Vec<(usize, Vec<f64>)>,
}

/// Parses the non-comment rows. The first row is taken as a column header
/// when `is_header` accepts it; every other row must be all finite numbers
/// with the same field count.
fn numeric_table(text: &str, is_header: impl Fn(&[&str]) -> bool) -> Result<Table> {
    let mut table = Table {
        header: None,
        rows: Vec::new(),
    };
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if table.header.is_none() && table.rows.is_empty() && is_header(&fields) {
            table.header = Some(fields.iter().map(|s| s.to_string()).collect());
            continue;
        }
        let values = fields
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::format(
                    Some(line),
                    format!("expected a finite number, got {f:?}"),
                )),
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::format(
                    Some(line),
                    format!("expected {w} fields, got {}", values.len()),
                ))
            }
            Some(_) => {}
        }
        table.rows.push((line, values));
    }
    Ok(table)
}

/// Checks that consecutive times step by `dt` within [`SPACING_TOLERANCE`].
fn check_spacing(times: &[(usize, f64)], dt: f64) -> Result<()> {
    for pair in times.windows(2) {
        let step = pair[1].1 - pair[0].1;
        if (step - dt).abs() > SPACING_TOLERANCE * dt {
            return Err(Error::format(
                Some(pair[1].0),
                format!("non-uniform time column: step {step} vs interval {dt}"),
            ));
        }
    }
    Ok(())
}

fn check_count(header: &SignalFileHeader, rows: usize) -> Result<()> {
    match header.n_samples {
        Some(n) if n != rows => Err(Error::format(
            None,
            format!("n_samples={n} but the file has {rows} data rows"),
        )),
        _ => Ok(()),
    }
}

/// Reads a signal CSV, returning the signal and its parsed header.
pub fn read_signal_csv_with_header(path: impl AsRef<Path>) -> Result<(Signal, SignalFileHeader)> {
    let text = read_text(path.as_ref())?;
    let (header, _) = parse_header(&text)?;
    let rate = header.resolved_rate()?;
    let table = numeric_table(&text, |f| {
        matches!(f, ["amplitude"] | ["t", "amplitude"])
    })?;
    let width = table.rows.first().map_or(1, |(_, v)| v.len());
    if !(1..=2).contains(&width) {
        return Err(Error::format(
            table.rows.first().map(|(l, _)| *l),
            format!("expected 1 or 2 columns, got {width}"),
        ));
    }
    if let Some(h) = &table.header {
        if h.len() != width {
            return Err(Error::format(
                None,
                format!("column header has {} names but rows have {width} fields", h.len()),
            ));
        }
    }
    check_count(&header, table.rows.len())?;
    let samples = if width == 2 {
        let times: Vec<(usize, f64)> = table.rows.iter().map(|(l, v)| (*l, v[0])).collect();
        check_spacing(&times, 1.0 / rate)?;
        table.rows.iter().map(|(_, v)| v[1]).collect()
    } else {
        table.rows.iter().map(|(_, v)| v[0]).collect()
    };
    Ok((Signal::new(samples, rate)?, header))
}

pub fn read_signal_csv(path: impl AsRef<Path>) -> Result<Signal> {
    read_signal_csv_with_header(path).map(|(s, _)| s)
}

fn preamble(out: &mut String, kind: &str, fs: f64, n: usize) {
    let _ = writeln!(out, "# format={kind}");
    let _ = writeln!(out, "# format_version={CSV_FORMAT_VERSION}");
    let _ = writeln!(out, "# tool={TOOL_NAME} {TOOL_VERSION}");
    let _ = writeln!(out, "# sample_rate_hz={fs}");
    let _ = writeln!(out, "# n_samples={n}");
}

/// Writes `signal` as `t,amplitude` rows.
pub fn write_signal_csv(signal: &Signal, label: Option<&str>, path: impl AsRef<Path>) -> Result<()> {
    let fs = signal.sample_rate_hz();
    let mut out = String::new();
    preamble(&mut out, "signal", fs, signal.len());
    if let Some(label) = label {
        let _ = writeln!(out, "# label={}", label.replace('\n', " "));
    }
    out.push_str("t,amplitude\n");
    for (i, x) in signal.samples().iter().enumerate() {
        let _ = writeln!(out, "{:.16e},{:.16e}", i as f64 / fs, x);
    }
    write_text(path.as_ref(), &out)
}

/// Column names of a decomposition file with `k` IMFs.
pub fn decomposition_columns(k: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=k).map(|i| format!("imf{i}")));
    cols.push("residue".to_string());
    cols
}

pub fn write_decomposition_csv(dec: &Decomposition, fs: f64, path: impl AsRef<Path>) -> Result<()> {
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::input(format!("sample rate must be positive, got {fs}")));
    }
    let n = dec.residue.len();
    if let Some(i) = dec.imfs.iter().position(|imf| imf.len() != n) {
        return Err(Error::input(format!(
            "IMF {} has {} samples, residue has {n}",
            i + 1,
            dec.imfs[i].len()
        )));
    }
    let mut out = String::new();
    preamble(&mut out, "decomposition", fs, n);
    let _ = writeln!(out, "# n_imfs={}", dec.imfs.len());
    out.push_str(&decomposition_columns(dec.imfs.len()).join(","));
    out.push('\n');
    for t in 0..n {
        let _ = write!(out, "{:.16e}", t as f64 / fs);
        for imf in &dec.imfs {
            let _ = write!(out, ",{:.16e}", imf[t]);
        }
        let _ = writeln!(out, ",{:.16e}", dec.residue[t]);
    }
    write_text(path.as_ref(), &out)
}

/// Reads a decomposition CSV; returns the decomposition and its sample rate.
pub fn read_decomposition_csv(path: impl AsRef<Path>) -> Result<(Decomposition, f64)> {
    let text = read_text(path.as_ref())?;
    let (header, meta) = parse_header(&text)?;
    let fs = header.resolved_rate()?;
    let table = numeric_table(&text, |f| f.first() == Some(&"t"))?;
    let names = table
        .header
        .ok_or_else(|| Error::format(None, "missing t,imf1..imfK,residue column header"))?;
    if names.len() < 2 || decomposition_columns(names.len() - 2) != names {
        return Err(Error::format(
            None,
            format!("unexpected columns {names:?}; want t,imf1..imfK,residue"),
        ));
    }
    let k = names.len() - 2;
    if let Some((line, _, v)) = meta.iter().find(|(_, key, _)| key == "n_imfs") {
        if v.parse::<usize>().ok() != Some(k) {
            return Err(Error::format(
                Some(*line),
                format!("n_imfs={v} but the header has {k} IMF columns"),
            ));
        }
    }
    if let Some((line, _)) = table.rows.iter().find(|(_, v)| v.len() != names.len()) {
        return Err(Error::format(
            Some(*line),
            format!("expected {} fields", names.len()),
        ));
    }
    check_count(&header, table.rows.len())?;
    let times: Vec<(usize, f64)> = table.rows.iter().map(|(l, v)| (*l, v[0])).collect();
    check_spacing(&times, 1.0 / fs)?;
    let imfs = (1..=k)
        .map(|c| table.rows.iter().map(|(_, v)| v[c]).collect())
        .collect();
    let residue: Vec<f64> = table.rows.iter().map(|(_, v)| v[k + 1]).collect();
    Ok((
        Decomposition {
            source_length: residue.len(),
            imfs,
            residue,
        },
        fs,
    ))
}

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"`.
pub mod float_sentinel {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got {other:?}"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApEnRow {
    pub imf: usize,
    pub apen: f64,
    pub flagged: bool,
}

pub fn apen_table(report: &ApEnReport) -> Vec<ApEnRow> {
    report
        .per_imf
        .iter()
        .map(|e| ApEnRow {
            imf: e.imf_index,
            apen: e.apen,
            flagged: report.flagged.contains(&e.imf_index),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(with = "float_sentinel")]
    pub snr_db: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub tool: String,
    pub report_format: u32,
    pub csv_format: u32,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            tool: format!("{TOOL_NAME} {TOOL_VERSION}"),
            report_format: REPORT_FORMAT_VERSION,
            csv_format: CSV_FORMAT_VERSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The fully resolved configuration of the run.
    pub config_echo: serde_json::Value,
    pub apen_table: Vec<ApEnRow>,
    pub metrics: Option<Metrics>,
    pub artifact_paths: Vec<String>,
    pub versions: Versions,
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &to_json_string(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = read_text(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}
