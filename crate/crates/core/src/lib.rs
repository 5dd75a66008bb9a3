//! Asynchronism-exponent bounds and end-to-end simulation of asynchronous
//! communication over finite discrete memoryless channels.
//!
//! A transmitter sends one of `M` codewords of length `N` starting at a time
//! `ν` drawn uniformly from `{1, .., A}`; before and after the codeword the
//! receiver sees pure noise, i.e. the output law of the no-input letter `⋆`.
//! With `A = e^{αN}`, `α` is the asynchronism exponent.
//!
//! The crate is split into:
//!
//! * [`probability`]: simplex and kernel types, divergences, mutual
//!   information, sampling and empirical types.
//! * [`capacity`]: synchronous capacity by alternating maximization with
//!   upper/lower certificates.
//! * [`exponents`]: the achievable exponent for a given input law, the upper
//!   bound for training-based (preamble) schemes, rate/exponent curves, and
//!   brute-force grid oracles for both.
//! * [`decoders`]: codebooks, the preamble-detecting training decoder, a joint
//!   sync-and-decode sequential decoder, and structural checks on training
//!   schemes.
//! * [`sim`]: the Monte-Carlo harness measuring error rate, reaction delay and
//!   rate.
//! * [`config`] and [`validation`]: the declarative config file and the oracle
//!   validation suite used by the command-line front end.
//!
//! All information quantities are in nats.

pub mod capacity;
pub mod config;
pub mod decoders;
mod error;
pub mod exponents;
pub mod format;
pub mod probability;
pub mod sim;
pub mod validation;

pub use error::{Error, Result};
pub use probability::{ChannelModel, Distribution, Kernel};
