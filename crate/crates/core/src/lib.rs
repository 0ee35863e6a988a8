//! Wave front-tracking for initial-boundary value problems of one-dimensional
//! systems of conservation laws, with boundary conditions derived from the
//! viscous approximation, and a finite-difference viscous reference solver.

pub mod boundary;
pub mod error;
pub mod front_tracking;
pub mod linalg;
pub mod ode;
pub mod riemann;
pub mod system;
pub mod viscous;

pub use error::{Error, Result};
pub use linalg::State;
