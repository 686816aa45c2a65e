//! Unsupervised domain adaptation with optimal transport for target domains
//! that observe extra features the source never had.

pub mod adapt;
pub mod costs;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod labeling;
pub mod models;
pub mod report;
pub mod rng;
pub mod transport;

pub use error::{Error, Result};
