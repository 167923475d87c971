//! Monte Carlo and closed-form mean first exit times and escape probabilities
//! for diffusions and stable Lévy flights run on a tempered stable clock.
//!
//! The spatial process moves in operational time `s`; the physical time is
//! `T(s)`, a tempered stable subordinator with Laplace exponent
//! `(lambda + mu)^alpha - mu^alpha`. Exit statistics are read off `T` at the
//! operational exit time.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod rand_stable;
pub mod specfun;
pub mod subordinator;

pub use dynamics::{Domain, DriftField, Driver, Dynamics, ExitRecord};
pub use error::{Error, Result};
pub use estimator::{
    CompareReport, CompareRule, EnsembleConfig, EstimateKind, MCEstimate, MfetEstimate, TargetSet,
};
pub use rand_stable::{make_stream, RngStream, TemperedStableParams};
pub use subordinator::{mean_rate, ClockState};
