//! lingemb: linguistically informed embeddings and classifiers for
//! harmful-text detection experiments.
//!
//! The pipeline: ingest CoNLL-U / labeled CSV corpora, encode them under
//! six feature schemes, train skip-gram negative-sampling embeddings over
//! window or dependency contexts, then score scheme x model grids with
//! class-weighted classifiers under stratified cross-validation.
//!
//! All numeric code is generic over the scalar type through [`real::Real`];
//! the crate root exports `f64`-backed aliases for callers that don't care.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod real;
pub mod synthetic;
pub mod util;

pub use error::{Error, Result};
pub use real::Real;

/// Default scalar for the concrete aliases below.
pub type Scalar = f64;

/// Embedding model over the default scalar.
pub type Embeddings = embedding::EmbeddingModel<Scalar>;
/// Trained classifier over the default scalar.
pub type Classifier = models::NetworkModel<Scalar>;
/// Classifier input over the default scalar.
pub type Input = models::ModelInput<Scalar>;
