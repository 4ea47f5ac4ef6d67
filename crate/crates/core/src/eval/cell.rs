//! One (scheme, model, condition) cell of the comparison matrix, scored
//! under stratified k-fold cross-validation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Label, LabeledCorpus};
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::features::{document_units, FeatureScheme};
use crate::models::{fit_classifier, ClassifierConfig, Condition, ModelArch};
use crate::real::Real;
use crate::util::mix_seed;

use super::folds::{derive_class_weights, stratified_folds};
use super::metrics::{f_score, mean_std};

const SALT_CELL: u64 = 0x4345_4c4c;

/// Cross-validation settings shared by every cell of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { folds: 10, seed: 42 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Param(format!(
                "cross-validation needs at least 2 folds, got {}",
                self.folds
            )));
        }
        Ok(())
    }
}

/// Coordinates of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellSpec {
    pub scheme: FeatureScheme,
    pub model: ModelArch,
    pub condition: Condition,
}

impl fmt::Display for CellSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.condition, self.scheme, self.model)
    }
}

/// Per-fold and aggregate scores for one cell. `fold_f1` is the
/// harmful-positive F1 per fold; means are unweighted over folds and the
/// standard deviations use the sample (n - 1) form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub scheme: FeatureScheme,
    pub model: ModelArch,
    pub condition: Condition,
    pub folds: usize,
    pub fold_seeds: Vec<u64>,
    pub fold_f1: Vec<f64>,
    pub fold_f1_macro: Vec<f64>,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub mean_f1_macro: f64,
    pub std_f1_macro: f64,
}

/// The unit stream a cell classifies over. DEPC only defines embedding
/// contexts, so its classifiers consume the raw token stream.
pub fn stream_scheme(scheme: FeatureScheme) -> FeatureScheme {
    if scheme == FeatureScheme::DepC {
        FeatureScheme::Tok
    } else {
        scheme
    }
}

/// Cross-validate one cell. Pretrained cells need the embedding model for
/// the cell's scheme; ad-hoc cells must not get one. Any failure is tagged
/// with the cell coordinates.
pub fn run_cell<R: Real>(
    corpus: &LabeledCorpus,
    spec: CellSpec,
    embeddings: Option<&EmbeddingModel<R>>,
    classifier: &ClassifierConfig,
    eval: &EvalConfig,
) -> Result<CellReport> {
    cell_inner(corpus, spec, embeddings, classifier, eval)
        .map_err(|e| e.in_cell(spec.to_string()))
}

fn cell_inner<R: Real>(
    corpus: &LabeledCorpus,
    spec: CellSpec,
    embeddings: Option<&EmbeddingModel<R>>,
    classifier: &ClassifierConfig,
    eval: &EvalConfig,
) -> Result<CellReport> {
    eval.validate()?;
    classifier.validate()?;
    match spec.condition {
        Condition::Pretrained => {
            let emb = embeddings.ok_or_else(|| {
                Error::Config("pretrained cell is missing its embedding model".into())
            })?;
            if let Some(tag) = emb.scheme() {
                if tag != spec.scheme {
                    return Err(Error::Config(format!(
                        "embedding model was trained for scheme {tag}, cell wants {}",
                        spec.scheme
                    )));
                }
            }
        }
        Condition::Adhoc => {
            if embeddings.is_some() {
                return Err(Error::Config("ad-hoc cell takes no embedding model".into()));
            }
            if spec.scheme == FeatureScheme::DepC {
                return Err(Error::Config(
                    "DEPC changes embedding contexts only; there is no ad-hoc DEPC cell".into(),
                ));
            }
        }
    }
    let stream = stream_scheme(spec.scheme);
    let units: Vec<Vec<String>> = corpus
        .documents
        .iter()
        .map(|d| document_units(d, stream))
        .collect::<Result<_>>()?;
    let labels = corpus.labels();
    let folds = stratified_folds(&labels, eval.folds, eval.seed)?;

    let mut fold_seeds = Vec::with_capacity(folds.k());
    let mut fold_f1 = Vec::with_capacity(folds.k());
    let mut fold_f1_macro = Vec::with_capacity(folds.k());
    for f in 0..folds.k() {
        let train_idx = folds.train_indices(f);
        let test_idx = folds.test_indices(f);
        let train_labels: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
        let weights = derive_class_weights(&train_labels)?;
        let fold_seed = mix_seed(mix_seed(eval.seed, SALT_CELL), f as u64);
        let fitted = fit_classifier(
            spec.model,
            spec.condition,
            &units,
            &labels,
            &train_idx,
            embeddings,
            classifier,
            &weights,
            fold_seed,
        )?;
        let mut preds = Vec::with_capacity(test_idx.len());
        let mut golds = Vec::with_capacity(test_idx.len());
        for &i in &test_idx {
            preds.push(fitted.classify(&units[i], embeddings)?.0);
            golds.push(labels[i]);
        }
        let m = f_score(&preds, &golds)?;
        fold_seeds.push(fold_seed);
        fold_f1.push(m.f1_positive);
        fold_f1_macro.push(m.f1_macro);
    }
    let (mean_f1, std_f1) = mean_std(&fold_f1);
    let (mean_f1_macro, std_f1_macro) = mean_std(&fold_f1_macro);
    Ok(CellReport {
        scheme: spec.scheme,
        model: spec.model,
        condition: spec.condition,
        folds: folds.k(),
        fold_seeds,
        fold_f1,
        fold_f1_macro,
        mean_f1,
        std_f1,
        mean_f1_macro,
        std_f1_macro,
    })
}
