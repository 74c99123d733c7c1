//! Modelling toolkit for Brillouin-scattering acousto-optic transducers.
//!
//! The crate covers the chain from material constants to device figures of
//! merit:
//!
//! * [`quantities`]: material data, units and rate conversions.
//! * [`coupling`]: phase-matched acoustic frequency, overlap integrals and the
//!   vacuum phonon-photon coupling rate.
//! * [`scattering`]: steady-state 2x2 scattering matrix of the anti-Stokes
//!   (beam-splitter) channel and efficiency sweeps.
//! * [`dynamics`]: time-domain integration of the coupled Langevin equations.
//! * [`stokes`]: the parametric-amplifier (Stokes) channel and sideband
//!   resolution.
//! * [`design`]: pump-budget and feasibility estimates.
//!
//! Internal physics is in CGS-Gaussian units with angular frequencies in
//! rad/s. Conversions to and from lab units live in [`quantities::units`].
//!
//! Batch operations run on rayon when the `parallel` feature is enabled
//! (default) and fall back to plain iterators otherwise; see [`Execution`].

pub mod coupling;
pub mod design;
pub mod dynamics;
mod error;
mod par;
pub mod quantities;
pub mod scattering;
pub mod stokes;

pub use error::{Error, Result};
pub use par::Execution;

pub use num_complex::Complex64;
