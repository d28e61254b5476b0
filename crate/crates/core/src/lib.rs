//! Response matrix / discrete ordinates solver for plane-parallel slabs with
//! anisotropic scattering.

pub mod error;
pub mod linalg;
pub mod phase;
pub mod quadrature;
pub mod response;
pub mod solver;
pub mod accel;
pub mod oracle;
pub mod bench;

pub use error::{Error, Result};
