//! Pseudo-spectral incompressible Navier-Stokes on the periodic box
//! `[0, 2pi)^3`, with fractional-order regularity monitoring, decay
//! envelopes, and turbulence statistics.
//!
//! Module map:
//! - [`grid`]: velocity fields, Fourier transforms, Leray projection,
//!   dealiasing, and checkpoint I/O
//! - [`fracops`]: fractional Laplacian, Sobolev and Lebesgue norms,
//!   Littlewood-Paley blocks, and the Bony paraproduct splitting
//! - [`solver`]: integrating-factor RK4 time stepper and the run loop
//! - [`criterion`]: logarithmically weighted regularity monitor
//! - [`decay`]: comparison ODE, algebraic decay envelope, Osgood bound
//! - [`turbulence`]: shell spectra, transfer and flux, structure
//!   functions, scaling exponents, intermittency diagnostics
//! - [`commutator`]: fractional advection commutator and its bounds
//!
//! Conventions shared by every module: the domain is the cube of side
//! `2pi` sampled on a uniform `n^3` grid, spectral coefficients are
//! Fourier-series coefficients (the forward transform divides by `n^3`),
//! wavenumbers are integers, and all logarithms are natural.

pub mod commutator;
pub mod criterion;
pub mod decay;
pub mod fracops;
pub mod grid;
pub mod solver;
pub mod turbulence;

pub(crate) mod util;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A structural or configuration parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A mathematical expression was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The solution left the resolvable regime (NaN/Inf or runaway sup norm).
    #[error("blow-up detected at t = {t:.6e}: sup |u| = {sup:.6e}")]
    BlowUp { t: f64, sup: f64 },
    /// A time step produced NaN or infinite coefficients.
    #[error("non-finite values in solution state")]
    NonFinite,
    /// A statistical fit was asked for with too little data.
    #[error("not enough samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    /// A spectral fit band holds too few shells.
    #[error("fit band too narrow: need at least {need} shells, got {got}")]
    InsufficientBand { need: usize, got: usize },
    /// Time samples handed to an accumulator went backwards.
    #[error("time samples must be strictly increasing: got {next} after {prev}")]
    NonMonotoneTime { prev: f64, next: f64 },
    /// A checkpoint file failed structural validation.
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
