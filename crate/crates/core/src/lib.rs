//! Federated vs centralized training on tabular student data, with random
//! label flipping as the attack.
//!
//! The pieces, bottom up:
//!
//! - [`dataset`]: schemas, loading, encoding, stratified splits and client
//!   partitions;
//! - [`models`]: logistic regression, linear SVM and random forest;
//! - [`federation`]: the client/server round loop and aggregation;
//! - [`attack`]: label flipping;
//! - [`metrics`]: accuracy, macro recall, macro F1 and AUC-ROC;
//! - [`experiment`]: the four-condition grid and its results table.
//!
//! The guide in `book/` walks through each of them.

pub mod attack;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod federation;
pub mod metrics;
pub mod models;
pub mod seed;

pub use error::{Error, Result};

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/federation.md")]
    mod federation {}
    #[doc = include_str!("../../../book/src/poisoning.md")]
    mod poisoning {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
