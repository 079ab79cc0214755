//! Thermodynamics of the Dicke model and of spin-only effective Hamiltonians
//! derived from it.
//!
//! * [`algebra`]: collective-spin and boson operator matrices, spin sectors.
//! * [`models`]: the Dicke Hamiltonian and the three effective spin models.
//! * [`thermo`]: finite-N partition functions and Gibbs averages.
//! * [`limit`]: mean-field free energy and critical temperatures as N → ∞.
//! * [`runner`]: the sweep / tc / compare / converge commands behind the CLI.

pub mod algebra;
pub mod error;
pub mod limit;
pub mod models;
pub mod runner;
pub mod thermo;

pub use algebra::{RealSymmetricMatrix, SpinSector};
pub use error::{Error, Result};
pub use limit::{GapSolution, LimitPoint};
pub use models::{BoseFactor, ModelKind, ModelParams};
pub use thermo::{Spectrum, ThermoPoint};
