//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
//! data, format and I/O errors. Every failure prints exactly one line to
//! stderr:
//!
//! ```text
//! iceemd-de: error kind=<tag> code=<exit code> message=<text>
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::apen::{apen_per_imf, ApEnConfig};
use crate::bench::{run_benchmark, BenchConfig, BenchTable, MethodStats};
use crate::emd::{emd, SiftConfig};
use crate::iceemd::{iceemd, EnsembleConfig};
use crate::io::{
    apen_table, read_decomposition_csv, read_signal_csv, write_decomposition_csv, write_json,
    write_signal_csv, Metrics, RunReport, Versions,
};
use crate::pipeline::{iceemd_de, imf_denoise_default, PipelineConfig, DEFAULT_APEN_THRESHOLD};
use crate::signals::{add_noise_snr, rmse, snr, synth_signal, SynthConfig};
use crate::wavelet::{DenoiseConfig, ExtensionMode, SigmaEstimator, WaveletKind};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "iceemd-de",
    version,
    about = "ICEEMD decomposition with entropy-gated wavelet denoising"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the two-tone benchmark signal, optionally with white noise.
    Synth(SynthArgs),
    /// Decompose a signal into IMFs and a residue.
    Decompose(DecomposeArgs),
    /// Approximate entropy of every IMF in a decomposition file.
    Apen(ApenArgs),
    /// Full ICEEMD-De: decompose, gate by entropy, denoise, rebuild.
    Denoise(DenoiseArgs),
    /// ICEEMD-De against wavelet-only denoising over seeded noise.
    Bench(BenchArgs),
    /// SNR and RMSE of an estimate against a reference.
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = SynthConfig::default().sample_rate_hz)]
    fs: f64,
    #[arg(long, default_value_t = SynthConfig::default().duration_s)]
    duration: f64,
    #[arg(long, default_value_t = SynthConfig::default().low_tone_hz)]
    low_tone_hz: f64,
    #[arg(long, default_value_t = SynthConfig::default().burst_tone_hz)]
    burst_tone_hz: f64,
    /// Add white noise at this SNR (requires --seed).
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    #[arg(long, default_value_t = EnsembleConfig::default().ensemble_size)]
    ensemble_size: usize,
    #[arg(long, default_value_t = EnsembleConfig::default().epsilon0)]
    epsilon0: f64,
    #[arg(long, default_value_t = EnsembleConfig::default().max_modes)]
    max_modes: usize,
    /// Use raw white noise instead of its normalized first mode at stage one.
    #[arg(long)]
    first_stage_raw_noise: bool,
    #[arg(long, default_value_t = SiftConfig::default().sd_threshold)]
    sd_threshold: f64,
    #[arg(long, default_value_t = SiftConfig::default().max_sift_iterations)]
    max_sift_iterations: usize,
}

impl EnsembleArgs {
    fn sift(&self) -> SiftConfig {
        SiftConfig {
            sd_threshold: self.sd_threshold,
            max_sift_iterations: self.max_sift_iterations,
            ..SiftConfig::default()
        }
    }

    fn config(&self, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            ensemble_size: self.ensemble_size,
            epsilon0: self.epsilon0,
            seed,
            max_modes: self.max_modes,
            sift: self.sift(),
            first_stage_raw_noise: self.first_stage_raw_noise,
        }
    }
}

#[derive(Args, Debug)]
struct ApenArgsCommon {
    #[arg(long, default_value_t = ApEnConfig::default().tolerance_factor)]
    tolerance_factor: f64,
    /// Lower bound on an IMF's tolerance spread, as a fraction of the
    /// decomposed signal's std.
    #[arg(long, default_value_t = ApEnConfig::default().imf_spread_floor)]
    imf_spread_floor: f64,
}

impl ApenArgsCommon {
    fn config(&self) -> ApEnConfig {
        ApEnConfig {
            tolerance_factor: self.tolerance_factor,
            imf_spread_floor: self.imf_spread_floor,
            ..ApEnConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct WaveletArgs {
    #[arg(long, default_value_t = imf_denoise_default().wavelet)]
    wavelet: WaveletKind,
    #[arg(long, default_value_t = imf_denoise_default().levels)]
    levels: usize,
    /// mad_finest or signal_std.
    #[arg(long, default_value = "signal_std")]
    sigma_estimator: SigmaEstimator,
    /// symmetric or periodic.
    #[arg(long, default_value = "symmetric")]
    extension_mode: ExtensionMode,
    /// Comma-separated detail levels to threshold (1 = finest); all if absent.
    #[arg(long, value_delimiter = ',')]
    threshold_levels: Option<Vec<usize>>,
}

impl WaveletArgs {
    fn config(&self) -> DenoiseConfig {
        DenoiseConfig {
            wavelet: self.wavelet,
            levels: self.levels,
            sigma_estimator: self.sigma_estimator,
            extension_mode: self.extension_mode,
            threshold_levels: self.threshold_levels.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Emd,
    Iceemd,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Iceemd)]
    method: Method,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Required for --method iceemd.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    apen: ApenArgsCommon,
    #[arg(long, default_value_t = DEFAULT_APEN_THRESHOLD, allow_negative_numbers = true)]
    apen_threshold: f64,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApenArgs {
    input: PathBuf,
    #[command(flatten)]
    apen: ApenArgsCommon,
    #[arg(long, default_value_t = DEFAULT_APEN_THRESHOLD, allow_negative_numbers = true)]
    threshold: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DenoiseArgs {
    input: PathBuf,
    /// Clean reference; adds SNR and RMSE to the report.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    apen: ApenArgsCommon,
    #[arg(long, default_value_t = DEFAULT_APEN_THRESHOLD, allow_negative_numbers = true)]
    apen_threshold: f64,
    #[command(flatten)]
    wavelet: WaveletArgs,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the gated IMFs (denoised where flagged) and the residue.
    #[arg(long)]
    imfs_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = BenchConfig::default().seeds)]
    seeds: usize,
    #[arg(long, default_value_t = BenchConfig::default().snr_db, allow_negative_numbers = true)]
    snr_db: f64,
    /// Noise seeds are base_seed, base_seed + 1, ..
    #[arg(long, default_value_t = BenchConfig::default().base_seed)]
    base_seed: u64,
    /// Mixed into every run's noise-bank seed.
    #[arg(long, default_value_t = EnsembleConfig::default().seed)]
    ensemble_seed: u64,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    apen: ApenArgsCommon,
    #[arg(long, default_value_t = DEFAULT_APEN_THRESHOLD, allow_negative_numbers = true)]
    apen_threshold: f64,
    #[command(flatten)]
    wavelet: WaveletArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    reference: PathBuf,
    estimate: PathBuf,
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::config(format!("--seed is required for {what}")))
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::InvalidTolerance(_) => 1,
        _ => 2,
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn report_error(kind: &str, code: i32, msg: &str) {
    eprintln!(
        "iceemd-de: error kind={kind} code={code} message={}",
        one_line(msg)
    );
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error");
            report_error("usage", 1, first.trim_start_matches("error: "));
            return 1;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            report_error(e.kind(), code, &e.to_string());
            code
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Decompose(a) => decompose(a),
        Command::Apen(a) => apen(a),
        Command::Denoise(a) => denoise(a),
        Command::Bench(a) => bench(a),
        Command::Metrics(a) => metrics(a),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        sample_rate_hz: a.fs,
        duration_s: a.duration,
        low_tone_hz: a.low_tone_hz,
        burst_tone_hz: a.burst_tone_hz,
    };
    let clean = synth_signal(&cfg)?;
    let (signal, label) = match a.snr_db {
        Some(db) => {
            let seed = require_seed(a.seed, "noisy synth (--snr-db)")?;
            (
                add_noise_snr(&clean, db, seed)?,
                format!(
                    "two-tone {} Hz + {} Hz burst, white noise snr_db={db} seed={seed}",
                    cfg.low_tone_hz, cfg.burst_tone_hz
                ),
            )
        }
        None => (
            clean,
            format!("two-tone {} Hz + {} Hz burst, clean", cfg.low_tone_hz, cfg.burst_tone_hz),
        ),
    };
    write_signal_csv(&signal, Some(&label), &a.output)
}

#[derive(Serialize)]
struct DecomposeEcho<'a> {
    command: &'static str,
    input: String,
    output: String,
    report: Option<String>,
    method: Method,
    sample_rate_hz: f64,
    n_samples: usize,
    /// Ensemble settings; for plain EMD only `sift` and `max_modes` apply.
    ensemble: &'a EnsembleConfig,
    apen: &'a ApEnConfig,
    apen_threshold: f64,
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    let signal = read_signal_csv(&a.input)?;
    let (dec, ens) = match a.method {
        Method::Iceemd => {
            let ens = a.ensemble.config(require_seed(a.seed, "--method iceemd")?);
            (iceemd(&signal, &ens)?, ens)
        }
        Method::Emd => {
            let ens = a.ensemble.config(a.seed.unwrap_or(0));
            ens.validate()?;
            (emd(&signal, &ens.sift, ens.max_modes)?, ens)
        }
    };
    write_decomposition_csv(&dec, signal.sample_rate_hz(), &a.output)?;
    if let Some(report_path) = &a.report {
        let apen_cfg = a.apen.config();
        let table = apen_per_imf(&dec, &apen_cfg, a.apen_threshold)?;
        let echo = DecomposeEcho {
            command: "decompose",
            input: path_str(&a.input),
            output: path_str(&a.output),
            report: Some(path_str(report_path)),
            method: a.method,
            sample_rate_hz: signal.sample_rate_hz(),
            n_samples: signal.len(),
            ensemble: &ens,
            apen: &apen_cfg,
            apen_threshold: a.apen_threshold,
        };
        let report = RunReport {
            config_echo: serde_json::to_value(&echo)?,
            apen_table: apen_table(&table),
            metrics: None,
            artifact_paths: vec![path_str(&a.output)],
            versions: Versions::current(),
        };
        write_json(&report, report_path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ApenEcho<'a> {
    command: &'static str,
    input: String,
    output: Option<String>,
    sample_rate_hz: f64,
    n_imfs: usize,
    apen: &'a ApEnConfig,
    threshold: f64,
}

fn apen(a: ApenArgs) -> Result<()> {
    let (dec, fs) = read_decomposition_csv(&a.input)?;
    let cfg = a.apen.config();
    let table = apen_per_imf(&dec, &cfg, a.threshold)?;
    let echo = ApenEcho {
        command: "apen",
        input: path_str(&a.input),
        output: a.output.as_deref().map(path_str),
        sample_rate_hz: fs,
        n_imfs: dec.n_imfs(),
        apen: &cfg,
        threshold: a.threshold,
    };
    let report = RunReport {
        config_echo: serde_json::to_value(&echo)?,
        apen_table: apen_table(&table),
        metrics: None,
        artifact_paths: Vec::new(),
        versions: Versions::current(),
    };
    match &a.output {
        Some(p) => write_json(&report, p),
        None => {
            for row in &report.apen_table {
                println!("imf{} apen={} flagged={}", row.imf, row.apen, row.flagged);
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct DenoiseEcho<'a> {
    command: &'static str,
    input: String,
    reference: Option<String>,
    output: String,
    report: Option<String>,
    imfs_out: Option<String>,
    sample_rate_hz: f64,
    n_samples: usize,
    pipeline: &'a PipelineConfig,
}

fn metrics_of(reference: &crate::Signal, estimate: &crate::Signal) -> Result<Metrics> {
    if reference.len() != estimate.len() {
        return Err(Error::input(format!(
            "reference has {} samples, estimate has {}",
            reference.len(),
            estimate.len()
        )));
    }
    if reference.sample_rate_hz() != estimate.sample_rate_hz() {
        return Err(Error::input(format!(
            "reference is sampled at {} Hz, estimate at {} Hz",
            reference.sample_rate_hz(),
            estimate.sample_rate_hz()
        )));
    }
    Ok(Metrics {
        snr_db: snr(reference.samples(), estimate.samples())?,
        rmse: rmse(reference.samples(), estimate.samples())?,
    })
}

fn denoise(a: DenoiseArgs) -> Result<()> {
    let signal = read_signal_csv(&a.input)?;
    let reference = a.reference.as_ref().map(read_signal_csv).transpose()?;
    let cfg = PipelineConfig {
        ensemble: a.ensemble.config(require_seed(a.seed, "denoise")?),
        apen: a.apen.config(),
        apen_threshold: a.apen_threshold,
        denoise: a.wavelet.config(),
    };
    let result = iceemd_de(&signal, &cfg)?;
    let metrics = reference
        .as_ref()
        .map(|r| metrics_of(r, &result.output))
        .transpose()?;

    write_signal_csv(&result.output, Some("ICEEMD-De output"), &a.output)?;
    let mut artifacts = vec![path_str(&a.output)];
    if let Some(p) = &a.imfs_out {
        write_decomposition_csv(&result.denoised_decomposition(), signal.sample_rate_hz(), p)?;
        artifacts.push(path_str(p));
    }
    if let Some(report_path) = &a.report {
        let echo = DenoiseEcho {
            command: "denoise",
            input: path_str(&a.input),
            reference: a.reference.as_deref().map(path_str),
            output: path_str(&a.output),
            report: Some(path_str(report_path)),
            imfs_out: a.imfs_out.as_deref().map(path_str),
            sample_rate_hz: signal.sample_rate_hz(),
            n_samples: signal.len(),
            pipeline: &cfg,
        };
        let report = RunReport {
            config_echo: serde_json::to_value(&echo)?,
            apen_table: apen_table(&result.apen_report),
            metrics,
            artifact_paths: artifacts,
            versions: Versions::current(),
        };
        write_json(&report, report_path)?;
    }
    Ok(())
}

fn stats_line(name: &str, s: &MethodStats) -> String {
    format!(
        "{name:<10} snr_db {:>7.3} ± {:.3}   rmse {:.4} ± {:.4}",
        s.snr_mean, s.snr_std, s.rmse_mean, s.rmse_std
    )
}

fn print_table(t: &BenchTable) {
    println!(
        "seeds {}..={} snr_db {}",
        t.seeds_used.first().copied().unwrap_or(0),
        t.seeds_used.last().copied().unwrap_or(0),
        t.config.snr_db
    );
    println!("{}", stats_line("original", &t.original));
    println!("{}", stats_line("iceemd_de", &t.iceemd_de));
    println!("{}", stats_line("wavelet", &t.wavelet));
}

fn bench(a: BenchArgs) -> Result<()> {
    if a.seeds == 0 {
        return Err(Error::config("--seeds must be at least 1"));
    }
    let cfg = BenchConfig {
        seeds: a.seeds,
        base_seed: a.base_seed,
        snr_db: a.snr_db,
        synth: SynthConfig::default(),
        pipeline: PipelineConfig {
            ensemble: a.ensemble.config(a.ensemble_seed),
            apen: a.apen.config(),
            apen_threshold: a.apen_threshold,
            denoise: a.wavelet.config(),
        },
    };
    let table = run_benchmark(&cfg)?;
    if let Some(p) = &a.output {
        write_json(&table, p)?;
    }
    print_table(&table);
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let reference = read_signal_csv(&a.reference)?;
    let estimate = read_signal_csv(&a.estimate)?;
    let m = metrics_of(&reference, &estimate)?;
    println!("snr_db={} rmse={}", m.snr_db, m.rmse);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run_cli(["iceemd-de", "--version"]), 0);
        assert_eq!(run_cli(["iceemd-de", "bench", "--help"]), 0);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_cli(["iceemd-de"]), 1);
        assert_eq!(run_cli(["iceemd-de", "frobnicate"]), 1);
        assert_eq!(run_cli(["iceemd-de", "bench", "--seeds", "ten"]), 1);
        assert_eq!(run_cli(["iceemd-de", "denoise", "x.csv", "-o", "y.csv", "--wavelet", "haar"]), 1);
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::config("x")), 1);
        assert_eq!(exit_code(&Error::InvalidTolerance(-1.0)), 1);
        assert_eq!(exit_code(&Error::input("x")), 2);
        assert_eq!(exit_code(&Error::format(Some(3), "x")), 2);
    }

    #[test]
    fn error_text_is_flattened() {
        assert_eq!(one_line("a\n  b\tc "), "a b c");
    }

    #[test]
    fn defaults_match_the_library() {
        let cli = Cli::try_parse_from(["iceemd-de", "bench"]).unwrap();
        let Command::Bench(a) = cli.command else {
            panic!("expected bench");
        };
        let pipeline = PipelineConfig {
            ensemble: a.ensemble.config(a.ensemble_seed),
            apen: a.apen.config(),
            apen_threshold: a.apen_threshold,
            denoise: a.wavelet.config(),
        };
        assert_eq!(pipeline, PipelineConfig::default());
        assert_eq!((a.seeds, a.base_seed, a.snr_db), (10, 0, 5.0));
    }
}
