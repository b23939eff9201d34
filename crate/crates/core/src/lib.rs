//! Arrival-time distributions of a two-level atom detected through its first
//! fluorescence photon after entering a laser-illuminated half-space `x ≥ 0`.
//!
//! Units are μm and μs; energies appear as rates `E/ħ`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod deconvolution;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod pipeline;
pub mod quadrature;
pub mod scattering;
pub mod scenario;
pub mod wavepacket;

pub use config::PhysicalConfig;
pub use error::{Error, Result};
pub use grid::{TemporalDistribution, TimeGrid};
pub use pipeline::{run_scenario, sweep, RunOptions, RunResult};
pub use scenario::Scenario;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/library.md")]
    mod library {}
    #[doc = include_str!("../../../book/src/checks.md")]
    mod checks {}
}
