//! Exact simulation engines and divisibility analysis for a spin-1/2 emitter
//! coupled to an XY spin chain.
//!
//! The crate is organized around a single channel representation
//! ([`channel::ChannelTrajectory`]) produced by several independent engines:
//!
//! * [`sector`] — one-excitation-sector evolution (vacuum environment, single
//!   initial environment excitation),
//! * [`dense`] — brute-force evolution of the full spin system at small `N`,
//! * [`gaussian`] — free-fermion evolution for edge coupling (`m0 = 1`),
//! * [`resolvent`] — thermodynamic-limit vacuum amplitude via contour
//!   integration of the retarded Green function.
//!
//! Divisibility robustness, rate extraction and the BLP trace-distance measure
//! operate on trajectories regardless of which engine produced them.

// Link against the system LAPACK/BLAS.
extern crate openblas_src;

pub mod blp;
pub mod channel;
pub mod correlations;
pub mod dense;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod rates;
pub mod resolvent;
pub mod robustness;
pub mod sector;
pub mod special;
pub mod spectrum;

pub use channel::{ChannelSample, ChannelTrajectory};
pub use model::{EnvInitialState, ModeBasis, Occupations, SystemSpec};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid system specification: {0}")]
    InvalidSpec(String),
    #[error("operation requires {0}")]
    Unsupported(String),
    #[error("dense engine refuses N={n} (cap {cap}); estimated {bytes} bytes per operator")]
    DenseCap { n: usize, cap: usize, bytes: usize },
    #[error("environment state violates the excitation-number block structure")]
    BlockStructure,
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
    #[error("linear algebra backend failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
