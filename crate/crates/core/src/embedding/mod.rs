//! Skip-gram negative-sampling embeddings.
//!
//! Training consumes either tokenized sentences (sliding-window contexts)
//! or pre-extracted (target, context) pairs (dependency contexts). The
//! trainer is deterministic for `worker_count == 1`; more workers run
//! lock-free over shared weights and trade bit reproducibility for speed.

mod model;
mod sampler;
mod train;
mod vocab;

pub use model::{cosine, EmbeddingModel};
pub use sampler::NegativeSampler;
pub use train::{
    sgns_probe, subsample_keep_probability, train_embeddings, train_embeddings_logged,
    train_embeddings_observed, EpochLog, PairCorpus, TrainConfig,
};
pub use vocab::Vocabulary;
