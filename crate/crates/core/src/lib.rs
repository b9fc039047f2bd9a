//! Concept bases and the relationships they capture.
//!
//! The crate builds concept-vector bases from concept-annotated data
//! ([`bases`]), scores them with neighbour-overlap metrics ([`metrics`]),
//! uses them to impute unintervened concepts at test time
//! ([`intervention`]), clusters them ([`clustering`]) and checks the
//! co-occurrence guarantees behind label bases by simulation ([`theory`]).

pub mod bases;
pub mod clustering;
pub mod datasets;
pub mod error;
pub mod intervention;
pub mod metrics;
pub mod predictors;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
