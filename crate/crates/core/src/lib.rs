//! Active-distance spectra and analytical BER bounds for rate-1/n recursive
//! systematic convolutional codes on the binary symmetric channel, with a
//! hard-decision Viterbi Monte-Carlo simulator for validation.
//!
//! The pipeline: [`codec`] parses generator polynomials and builds the code
//! trellis, [`spectrum`] computes the distance spectrum of active distances by
//! dynamic programming over that trellis, [`bounds`] turns a spectrum into
//! lower/upper BER bound curves, and [`simulator`] measures empirical BER/FER
//! to sandwich-check the bounds. [`cli`] glues the four together behind the
//! `convbounds` binary.

pub mod bounds;
pub mod cli;
pub mod codec;
pub mod error;
pub mod simulator;
pub mod spectrum;

pub use error::Error;

/// Tool version embedded in every emitted file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
