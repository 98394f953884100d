//! Simulation and cross-validation of quantum-chaos diagnostics for the
//! quantum kicked top.
//!
//! The collective spin of `N` spin-1/2 particles lives in the `N+1`
//! dimensional Dicke (maximal-`j`) subspace. On top of that algebra the crate
//! builds the Floquet propagator, out-of-time-ordered correlators and the
//! cumulative nonclassicality of their quasiprobability, Husimi portraits,
//! single-spin entanglement entropy, the tripartite mutual information of
//! the unitary channel, the classical stroboscopic map and power spectra.

pub mod channel_tmi;
pub mod classical_map;
pub mod cli;
pub mod error;
pub mod floquet_engine;
pub mod otoc_quasiprob;
pub mod spectra;
pub mod spin_core;
pub mod state_diagnostics;

pub use error::{KickedTopError, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMat = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<Complex64>;

/// Largest entry magnitude of a complex matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖U†U − I‖_max`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMat::identity(n, n)))
}
