//! Subcommand implementations. Each `run` re-checks what it needs from the
//! resolved manifest (validation, exit 1), then does its work (runtime
//! failures, exit 2), writing outputs only after the work that feeds them
//! has finished.

pub mod encode;
pub mod experiment;
pub mod ingest_check;
pub mod report;
pub mod train_classifier;
pub mod train_embeddings;

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use lingemb::corpus::{parse_conllu, parse_labeled_dataset, AnnotatedSentence, LabeledCorpus};
use lingemb::features::FeatureScheme;
use lingemb::models::{Condition, ModelArch};

use crate::config::{runtime, CliError};

pub(crate) fn load_treebank(path: &Path) -> Result<Vec<AnnotatedSentence>, CliError> {
    let file = open(path)?;
    parse_conllu(BufReader::new(file)).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

pub(crate) fn load_dataset(
    csv: &Path,
    annotations: Option<&Path>,
) -> Result<LabeledCorpus, CliError> {
    let csv_file = open(csv)?;
    let companion = match annotations {
        Some(p) => Some(BufReader::new(open(p)?)),
        None => None,
    };
    parse_labeled_dataset(csv_file, companion)
        .map_err(|e| runtime(format!("{}: {e}", csv.display())))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn units_path(out: &Path, scheme: FeatureScheme) -> PathBuf {
    out.join(format!("units-{scheme}.txt"))
}

pub(crate) fn pairs_path(out: &Path) -> PathBuf {
    out.join("pairs-DEPC.tsv")
}

pub(crate) fn checkpoint_path(
    out: &Path,
    condition: Condition,
    scheme: FeatureScheme,
    model: ModelArch,
) -> PathBuf {
    out.join(format!("checkpoint-{condition}-{scheme}-{model}.ckpt"))
}
