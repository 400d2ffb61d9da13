pub mod elastic_kernels;
pub mod error;
pub mod factorization;
pub mod forward;
pub mod linalg2;
pub mod matrix_io;
pub mod medium_geometry;
pub mod oti;
pub mod specfun;

pub use error::{Error, Result};
