//! Closed-form optimal beamforming and performance analysis for a
//! RIS-assisted MISO downlink with a line-of-sight BS–RIS link and
//! Rayleigh-faded RIS–UE link.
//!
//! * [`channel`]: planar-array steering vectors, LoS and cascaded channels.
//! * [`beamforming`]: rank-1 closed-form RIS phases and BS beamformer,
//!   plus an exhaustive lattice oracle for tiny K.
//! * [`snr_statistics`]: CLT and Gamma fits of `Y = Σ|hᵢ|`, tail expansions.
//! * [`performance`]: outage, diversity/coding gain, rate bound, SEP.
//! * [`montecarlo`]: reproducible parallel simulation oracle.
//! * [`specfun`]: Q-function, incomplete gamma, Gauss–Legendre.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod exec;
pub mod montecarlo;
pub mod performance;
pub mod snr_statistics;
pub mod specfun;
pub mod vector;

pub use error::{Error, Result};
pub use exec::Execution;
pub use num_complex::Complex64;
pub use vector::{ComplexVector, DenseMatrix};
