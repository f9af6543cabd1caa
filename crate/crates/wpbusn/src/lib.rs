//! Simulator and optimization library for RIS-aided wireless-powered
//! backscatter underground sensor networks.
//!
//! A power station (PS) wirelessly charges sensor nodes buried in soil;
//! the nodes either backscatter the PS carrier to an access point (BC mode)
//! or harvest energy first and transmit actively later (HTT mode). A
//! reconfigurable intelligent surface (RIS) with `K` passive phase-shifting
//! elements compensates for the blocked direct links and the soil losses.
//!
//! The crate is organized bottom-up:
//!
//! - [`soil`] — complex soil permittivity, attenuation/phase constants,
//!   underground path loss, and refraction loss at the soil-air interface
//! - [`channel`] — geometry and per-device complex channel coefficients for
//!   direct and RIS-cascaded links
//! - [`energy`] — saturation non-linear energy harvesting
//! - [`optimizer`] — joint RIS phase-shift and TDMA time-allocation design,
//!   plus the benchmark strategies and brute-force oracles
//! - [`harness`] — configuration files, Monte Carlo parameter sweeps, and
//!   CSV/SVG emission
//!
//! The `wpbusn-sim` binary drives the harness from the command line. A
//! narrative guide with runnable snippets lives in `book/`; its code blocks
//! are executed as doc-tests (see the `guide` module).

pub mod channel;
pub mod energy;
mod guide;
pub mod harness;
pub mod optimizer;
pub mod soil;
pub mod units;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a physical or mathematical domain restriction.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input was outside the validity range of an empirical model.
    #[error("model validity error: {0}")]
    ModelValidity(String),

    /// A geometric precondition failed (e.g. below the reference distance).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A caller broke an API contract (mismatched lengths, unknown variant).
    #[error("contract error: {0}")]
    Contract(String),

    /// A configuration file failed to parse or validate.
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: config errors map to 2, everything
    /// else to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            _ => 3,
        }
    }
}
