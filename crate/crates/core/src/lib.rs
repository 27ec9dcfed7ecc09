//! Simulation and analysis toolkit for flux-trapping fluxonium qubits.
//!
//! - [`qubit`]: fluxonium and SQUID-transmon Hamiltonians, spectra, matrix
//!   elements, flux dispersion and sweet-spot search.
//! - [`fluxtrap`]: fluxoid quantization in the trapping ring, cooldown
//!   protocol simulation and phase-bias deviation statistics.
//! - [`coherence`]: dielectric relaxation, 1/f flux-noise echo and Ramsey
//!   dephasing, echo decay time and effective temperature.
//! - [`fit`]: damped Gauss-Newton least squares and the spectroscopy, decay
//!   and noise-parameter fits built on it.
//! - [`io`]: device records, delimited tables and plot-data emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherence;
pub mod constants;
mod error;
pub mod fit;
pub mod fluxtrap;
pub mod io;
pub mod linalg;
pub mod qubit;

pub use error::{Error, ErrorKind, Result};

pub use coherence::{NoiseModel, RatePair};
pub use fit::{DecayTrace, FitResult, SpectroscopyDataset, SpectroscopyPoint};
pub use fluxtrap::{CoilCalibration, ProtocolTimeline, RingParams, TrapResult, TrapStats};
pub use qubit::{EnergySpectrum, FluxConfig, FluxoniumParams, SolverConfig, TransmonParams};
