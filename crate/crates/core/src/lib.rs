pub mod document;
pub mod dompoles;
pub mod error;
pub mod linalg;
pub mod matpoly;
pub mod metrics;
pub mod reduce;
pub mod solvents;
pub mod sysrep;

pub use error::{Error, ErrorClass, Result};
