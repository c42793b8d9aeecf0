//! Graph-based semi-supervised molecular property classification.
//!
//! Molecules are parsed from SMILES, encoded as ECFP bit vectors (or any
//! externally computed feature matrix), connected into a k-NN similarity
//! graph, and classified from a handful of labels by spectral MBO threshold
//! dynamics.

pub mod dataio;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod fingerprint;
pub mod graph;
pub mod mbo;
pub mod metrics;
pub mod rng;
pub mod smiles;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
