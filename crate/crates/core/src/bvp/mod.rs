//! Constrained Dirac boundary value problem and quasilocal energy.

pub mod energy;
pub mod kernel;
pub mod minimize;
pub mod quasilocal;
pub mod system;

pub use quasilocal::{quasilocal_energy, EnergyReport, EnergyRequest, KernelSummary, Method, PathChoice, Residuals};
