//! Link-level simulation of super-mode OFDM with index modulation (SuM-OFDM-IM).
//!
//! Each subblock of `n` subcarriers carries bits in three ways: which pair of
//! constellation modes is active (the mode activation pattern, MAP), which
//! `n/2` subcarriers take the first mode (the subcarrier activation pattern,
//! SAP), and the data symbols drawn from the two modes. Every data symbol is
//! repeated over a pair of subcarriers, which gives second-order diversity.
//!
//! The crate is organised bottom-up:
//!
//! - [`combinatorics`]: rank/unrank of MAPs and SAPs, joint and separate selection.
//! - [`modes`]: mode sets obtained by coset partitioning of QAM constellations.
//! - [`txrx`]: subblock encoder, block interleaver, OFDM modulator and baselines.
//! - [`channel`]: Rayleigh/Rician multipath, AWGN and time-domain impairments.
//! - [`detect`]: exhaustive ML and the LLR-based reduced-complexity detector.
//! - [`analysis`]: pairwise error probabilities, union bound, rank spectrum.
//! - [`sync`]: preamble timing/CFO estimation, pilot channel and SNR estimation.
//! - [`harness`]: Monte Carlo BER runs, bound sweeps, table regeneration.

pub mod analysis;
pub mod channel;
pub mod combinatorics;
pub mod config;
pub mod detect;
pub mod error;
pub mod harness;
pub mod modes;
pub mod rng;
pub mod sync;
pub mod trace;
pub mod txrx;

pub use num_complex::Complex64;

pub use config::{Scheme, Selection, SystemConfig};
pub use error::{Error, Result};
pub use modes::ModeSet;

/// A single bit, stored as 0 or 1.
pub type Bit = u8;
