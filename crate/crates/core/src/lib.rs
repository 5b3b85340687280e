//! Training-data selection for multi-domain sentiment classification.
//!
//! Given labeled documents from several source domains and a target domain,
//! the crate represents documents and domains, scores their similarity to the
//! target and selects a training set at the domain, instance or subset level.
//! The selected set trains a linear classifier that is evaluated on the target.

pub mod autoencoder;
pub mod commands;
pub mod corpus;
pub mod embeddings;
pub mod evaluation;
pub mod par;
pub mod representations;
pub mod rng;
pub mod selection;
pub mod similarity;
pub mod sparse;
pub mod synthetic;
