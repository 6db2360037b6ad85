//! Flexible uplink/downlink cell association for a user with dual
//! connectivity in a two-tier HetNet.
//!
//! The crate provides the association classifiers and closed-form case
//! probabilities ([`association`]), the conditional serving-distance laws of
//! the decoupled cases ([`distance`]), the SIR and spectral-efficiency
//! integrals ([`capacity`]) and an independent Monte Carlo oracle
//! ([`montecarlo`]).

pub mod association;
pub mod capacity;
pub mod distance;
mod error;
pub mod montecarlo;
pub mod params;
pub mod quad;
pub mod stats;

pub use association::{
    all_case_probabilities, case_probability, classify_by_inequalities, classify_by_orderings, CaseProbabilities,
    Cell, Classifier, DistanceTriple, Subcase,
};
pub use error::{Error, Result};
pub use params::{NetworkParams, ParamError, Scenario, ValidParams};
