//! Simulation of a defect-coupled optomechanical phonon laser.
//!
//! Two whispering-gallery resonators share a mechanical mode that also
//! couples to a single two-level-system (TLS) defect. The crate provides
//!
//! - [`params`], [`units`], [`config`]: validated parameters in rad/s with
//!   unit-tagged input,
//! - [`dynamics`]: mean-field integration of the full supermode equations and
//!   the reduced coherence equations, plus growth-rate fitting,
//! - [`steadystate`]: adiabatic elimination, mechanical gain, threshold power
//!   and the self-consistent phonon number,
//! - [`spectrum`]: the effective non-Hermitian TLS–phonon Hamiltonian, its
//!   exceptional point and the gain turning point,
//! - [`sweep`] and [`output`]: parameter sweeps, figure presets and CSV/plot
//!   emission.

pub mod config;
pub mod dynamics;
pub mod output;
pub mod params;
pub mod presets;
pub mod spectrum;
pub mod steadystate;
pub mod sweep;
pub mod units;

pub use num_complex::Complex64;
pub use params::{DerivedQuantities, SystemParams};
