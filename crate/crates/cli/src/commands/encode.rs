//! `encode`: one unit file per requested unit scheme, plus a two-column
//! TSV pair file when DEPC is requested.
//!
//! The treebank corpus is encoded sentence-per-line (embedding-training
//! input); with only a labeled dataset configured, documents are encoded
//! one per line instead. All schemes are encoded in memory before the
//! first file is written, so a failing scheme leaves nothing half-done.

use std::path::PathBuf;

use lingemb::corpus::write_units;
use lingemb::features::{
    dependency_pairs, document_dependency_pairs, document_units, encode_units, write_pairs,
    FeatureScheme, TrainingPair, UnitSource,
};

use crate::commands::{load_dataset, load_treebank, pairs_path, units_path, write_file};
use crate::config::{runtime, validation, CliError, Resolved};

enum Encoded {
    Units(Vec<Vec<String>>),
    Pairs(Vec<TrainingPair>),
}

pub fn run(r: &Resolved) -> Result<u8, CliError> {
    if r.cfg.corpus.is_none() && r.cfg.dataset.is_none() {
        return Err(validation("encode needs a `corpus` or `dataset` path in the config"));
    }

    let mut outputs: Vec<(FeatureScheme, PathBuf, Encoded)> = Vec::new();
    if let Some(path) = &r.cfg.corpus {
        let sentences = load_treebank(path)?;
        for &scheme in &r.schemes {
            let enc = if scheme.is_unit_scheme() {
                let mut lines = Vec::with_capacity(sentences.len());
                for s in &sentences {
                    lines.push(encode_units(s, scheme).map_err(runtime)?);
                }
                Encoded::Units(lines)
            } else {
                Encoded::Pairs(
                    sentences.iter().flat_map(|s| dependency_pairs(s, UnitSource::Forms)).collect(),
                )
            };
            outputs.push((scheme, out_path(r, scheme), enc));
        }
    } else {
        let dataset = load_dataset(r.require_dataset()?, r.cfg.annotations.as_deref())?;
        for &scheme in &r.schemes {
            let enc = if scheme.is_unit_scheme() {
                let mut lines = Vec::with_capacity(dataset.len());
                for doc in &dataset.documents {
                    lines.push(document_units(doc, scheme).map_err(runtime)?);
                }
                Encoded::Units(lines)
            } else {
                let mut pairs = Vec::new();
                for doc in &dataset.documents {
                    pairs.extend(document_dependency_pairs(doc, UnitSource::Forms).map_err(runtime)?);
                }
                Encoded::Pairs(pairs)
            };
            outputs.push((scheme, out_path(r, scheme), enc));
        }
    }

    for (scheme, path, enc) in &outputs {
        let mut buf = Vec::new();
        let lines = match enc {
            Encoded::Units(lines) => {
                write_units(&mut buf, lines).map_err(runtime)?;
                lines.len()
            }
            Encoded::Pairs(pairs) => {
                write_pairs(&mut buf, pairs).map_err(runtime)?;
                pairs.len()
            }
        };
        write_file(path, &buf)?;
        let what = if scheme.is_unit_scheme() { "lines" } else { "pairs" };
        println!("wrote {} ({lines} {what})", path.display());
    }
    Ok(0)
}

fn out_path(r: &Resolved, scheme: FeatureScheme) -> PathBuf {
    if scheme.is_unit_scheme() {
        units_path(&r.cfg.out_dir, scheme)
    } else {
        pairs_path(&r.cfg.out_dir)
    }
}
