pub mod eigen;
pub mod error;
pub mod kernel;
pub mod model;
pub mod profile;
pub mod quadrature;
pub mod reference;
pub mod scenario;
pub mod sources;
pub mod specfun;

pub use error::{Error, Result, ValidationError};
