use thiserror::Error;

use crate::association::DistanceTriple;
use crate::params::ParamError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),

    #[error("eta must be at least 1 (P_m >= P_s), got {0}")]
    EtaBelowOne(f64),

    #[error("case {0} is not a valid case id (expected 1..=6)")]
    UnknownCase(u8),

    #[error("case {0} is not a decoupled case (expected 3, 4 or 5)")]
    NotDecoupled(u8),

    #[error("no conditional distance law for role {role} in case {case}")]
    UndefinedRole { case: u8, role: &'static str },

    #[error("case {case} has zero probability for these parameters; conditional quantities are undefined")]
    EmptyRegion { case: u8 },

    #[error("baseline {baseline} is not defined for case {case}")]
    BaselineUndefined { baseline: &'static str, case: u8 },

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("triple {0:?} matched no association row")]
    Unclassifiable(DistanceTriple),

    #[error("triple {triple:?} matched {matches} association rows")]
    AmbiguousClassification { triple: DistanceTriple, matches: usize },

    #[error("first DL link to an SCell with first UL link to the MCell for {0:?}")]
    ImpossibleAssociation(DistanceTriple),

    #[error("quadrature did not converge: estimate {value}, error {abs_err} after {intervals} intervals")]
    Quadrature { value: f64, abs_err: f64, intervals: usize },

    #[error("capacity integrand has not decayed below {threshold} by t = {t_max} (ccdf = {ccdf})")]
    Divergence { t_max: f64, ccdf: f64, threshold: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}
