//! Decomposition and denoising of bolt (anchor) detection signals.
//!
//! The crate bundles the pieces of the ICEEMD-De workflow:
//!
//! - [`emd`]: plain empirical mode decomposition (sifting, envelopes, the
//!   single-mode and local-mean operators).
//! - [`iceemd`]: improved complete ensemble EMD with mode-filtered adaptive noise.
//! - [`apen`]: approximate entropy, used to decide which IMFs are noisy.
//! - [`wavelet`]: orthogonal DWT filter bank with universal soft thresholding.
//! - [`pipeline`]: decompose, gate by entropy, denoise flagged IMFs, rebuild.
//! - [`signals`]: synthetic benchmark signal, noise injection, SNR/RMSE, spectra.
//! - [`io`] and [`cli`]: CSV/JSON formats and the command-line front end.

pub mod apen;
pub mod bench;
pub mod cli;
pub mod emd;
mod error;
pub mod iceemd;
pub mod io;
pub mod pipeline;
pub mod signals;
mod stats;
pub mod wavelet;

pub use error::{Error, Result};
pub use signals::Signal;
