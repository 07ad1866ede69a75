//! Spinorial quasilocal energy of compact Riemannian domains measured against
//! a flat background.
//!
//! The crate is generic over the real scalar through [`Real`]; the `f64`
//! aliases below are what applications use.

pub mod clifford;
pub mod closed_form;
pub mod dense;
pub mod dirac;
pub mod bvp;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod scalar;
pub mod sparse;

pub use bvp::{quasilocal_energy, EnergyReport, EnergyRequest, KernelSummary, Method, PathChoice, Residuals};
pub use closed_form::{ClosedFormResult, EnergyValue, Formula};
pub use dirac::{AssemblyMode, FiberPath};
pub use error::{Error, Result};
pub use geometry::{ConformalFactor, MetricField, MetricSpec, RotProfile, Topology};
pub use scalar::{Cx, Real};

pub type CliffordRep = clifford::CliffordRep<f64>;
pub type FormAlgebra = clifford::FormAlgebra<f64>;
pub type CMat = dense::CMat<f64>;
pub type DiscreteDomain = geometry::DiscreteDomain<f64>;
pub type BoundaryGeometry = geometry::BoundaryGeometry<f64>;
pub type Fiber = dirac::Fiber<f64>;
pub type SpinorField = dirac::SpinorField<f64>;
pub type ConstrainedSystem = bvp::system::ConstrainedSystem<f64>;
pub type KernelInfo = bvp::kernel::KernelInfo<f64>;
pub type BoundaryData = bvp::kernel::BoundaryData<f64>;
pub type Solution = bvp::kernel::Solution<f64>;
