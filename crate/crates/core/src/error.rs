use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("distribution has no mass (integral {0:e})")]
    ZeroMass(f64),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("mode requested at the degenerate point gamma = 2 omega; use the confluent form")]
    DegenerateCoupling,
    #[error("wavenumber must be positive, got {0}")]
    InvalidWavenumber(f64),
    #[error("momentum grid misses {tail:e} of the packet norm")]
    GridCoverage { tail: f64 },
    #[error("modes and momentum amplitude were built on different grids")]
    InconsistentGrids,
    #[error("spatial domain too small: boundary density {density:e} at t = {t}")]
    DomainTooSmall { density: f64, t: f64 },
    #[error("oracle step check failed: {0}")]
    StabilityViolation(String),
    #[error("reflection not negligible: N_inf = {n_infty:e}, integral of Pi = {pi_mass:e}")]
    ReflectionNotNegligible { n_infty: f64, pi_mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
