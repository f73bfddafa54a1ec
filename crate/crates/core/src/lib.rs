//! Budget-constrained committee selection with approximate core guarantees.
//!
//! The pipeline is a Nash-welfare local search over the multilinear
//! extension of each voter's utility, followed by iterative randomized
//! rounding that retires satisfied voters round by round. An exact
//! brute-force verifier computes the smallest `alpha` for which a committee
//! is in the `alpha`-core.
//!
//! Numeric types are generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases fix the common case.

pub mod error;
pub mod generators;
pub mod iter_round;
pub mod model;
pub mod multilinear;
pub mod nw_search;
pub mod rng;
pub mod rounding;
pub mod scalar;
mod serde_util;
pub mod set;
pub mod verify;

pub use error::{Error, Result};
pub use iter_round::{solve, DriverParams, Preset, Solution, SolveReport};
pub use model::{
    load_instance, parse_instance, Candidate, Instance, InstanceFile, UtilityOracle, Voter,
};
pub use multilinear::{EstimatorConfig, FractionalAllocation, Multilinear};
pub use nw_search::{nw_local_search, NwParams, NwResult, Profile};
pub use rounding::Committee;
pub use scalar::Scalar;
pub use set::CandidateSet;
pub use verify::{min_alpha, DeviationCertificate, Enumeration, VerifyOptions, VerifyReport};

pub type InstanceF64 = Instance<f64>;
pub type VoterF64 = Voter<f64>;
pub type UtilityOracleF64 = UtilityOracle<f64>;
pub type FractionalAllocationF64 = FractionalAllocation<f64>;
pub type NwParamsF64 = NwParams<f64>;
pub type NwResultF64 = NwResult<f64>;
