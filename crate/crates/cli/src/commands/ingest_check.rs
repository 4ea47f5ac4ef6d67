//! `ingest-check`: parse everything the manifest points at and print what
//! was found, without writing any files.

use crate::config::{validation, CliError, Resolved};
use crate::commands::{load_dataset, load_treebank};

pub fn run(r: &Resolved) -> Result<u8, CliError> {
    if r.cfg.corpus.is_none() && r.cfg.dataset.is_none() {
        return Err(validation(
            "ingest-check needs a `corpus` and/or `dataset` path in the config",
        ));
    }

    if let Some(path) = &r.cfg.corpus {
        let sentences = load_treebank(path)?;
        let tokens: usize = sentences.iter().map(|s| s.len()).sum();
        println!("corpus {}: {} sentences, {tokens} tokens", path.display(), sentences.len());
    }

    if let Some(path) = &r.cfg.dataset {
        let corpus = load_dataset(path, r.cfg.annotations.as_deref())?;
        let counts = corpus.counts();
        let annotated = corpus.documents.iter().filter(|d| d.is_annotated()).count();
        println!(
            "dataset {}: {} documents ({} harmful, {} clean), {annotated} annotated",
            path.display(),
            counts.total(),
            counts.harmful,
            counts.clean,
        );
        if annotated < corpus.len() {
            println!(
                "note: {} unannotated documents restrict encoding to the TOK scheme",
                corpus.len() - annotated
            );
        }
    }

    Ok(0)
}
