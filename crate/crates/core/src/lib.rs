//! Numerical laboratory for the Novikov-Veselov equation at positive energy:
//! stationary-phase geometry, oscillatory quadrature of the linearized
//! solution, dbar reconstruction of the potential from scattering data, and
//! the leading-order constant along the cusp direction.

pub mod asymptotics;
pub mod dbar;
pub mod error;
pub mod linearized;
pub mod oracles;
pub mod phase;
pub mod quadrature;
pub mod scattering;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use phase::{StationaryAnalysis, StationaryCase};
pub use quadrature::{AnnularGrid, ComplexSample, GridSpec};
pub use scattering::{Profile, ScatteringData};
