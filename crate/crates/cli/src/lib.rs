//! Experiment driver for the elastic factorization method.

pub mod config;
pub mod metrics;
pub mod pipeline;
pub mod selftest;

use elastic_fm::Error;

use config::ConfigError;

/// Process exit code for an error: 2 configuration, 3 solver, 4 numerical.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::SolverResidual { .. }) => 3,
        Some(
            Error::InvalidParameter(_)
            | Error::Format(_)
            | Error::PointOutOfRange { .. }
            | Error::OrderOutOfRange { .. },
        ) => 2,
        Some(Error::Io(_)) => 2,
        Some(_) => 4,
        None if err.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 4,
    }
}
