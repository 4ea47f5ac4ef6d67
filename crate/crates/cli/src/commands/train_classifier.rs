//! `train-classifier`: fit a single (scheme, model, condition) cell on the
//! whole labeled dataset — no held-out folds — and save the resulting
//! checkpoint. The printed F1 is measured on the training documents and
//! is a fit diagnostic, not an evaluation.

use std::fs::File;
use std::io::BufReader;

use lingemb::embedding::EmbeddingModel;
use lingemb::eval::{derive_class_weights, f_score, stream_scheme};
use lingemb::features::{document_units, FeatureScheme};
use lingemb::models::{fit_classifier, save_checkpoint, Condition};
use lingemb::Scalar;

use crate::commands::{checkpoint_path, load_dataset, write_file};
use crate::config::{runtime, validation, CliError, Resolved};

pub fn run(r: &Resolved) -> Result<u8, CliError> {
    let dataset_path = r.require_dataset()?;
    let &[scheme] = r.schemes.as_slice() else {
        return Err(validation("train-classifier fits one cell; pass exactly one --scheme"));
    };
    let &[model] = r.models.as_slice() else {
        return Err(validation("train-classifier fits one cell; pass exactly one --model"));
    };
    let &[condition] = r.conditions.as_slice() else {
        return Err(validation(
            "train-classifier fits one cell; pass exactly one --condition",
        ));
    };
    if condition == Condition::Adhoc && scheme == FeatureScheme::DepC {
        return Err(validation(
            "DEPC defines embedding contexts only; it has no ad-hoc unit stream",
        ));
    }
    let embedding_file = match condition {
        Condition::Pretrained => Some(r.embedding_source(scheme).ok_or_else(|| {
            validation(format!(
                "pretrained {scheme} needs an embeddings entry in the config \
                 (or emb-{scheme}.vec under the output directory)"
            ))
        })?),
        Condition::Adhoc => None,
    };

    let embeddings = match &embedding_file {
        Some(path) => {
            let reader = File::open(path)
                .map(BufReader::new)
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            let model = EmbeddingModel::<Scalar>::load(reader)
                .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            Some(model.with_scheme(Some(scheme)))
        }
        None => None,
    };

    let dataset = load_dataset(dataset_path, r.cfg.annotations.as_deref())?;
    let stream = stream_scheme(scheme);
    let mut units = Vec::with_capacity(dataset.len());
    for doc in &dataset.documents {
        units.push(document_units(doc, stream).map_err(runtime)?);
    }
    let labels = dataset.labels();
    let weights = derive_class_weights(&labels).map_err(runtime)?;
    let train_idx: Vec<usize> = (0..dataset.len()).collect();

    let ckpt = fit_classifier(
        model,
        condition,
        &units,
        &labels,
        &train_idx,
        embeddings.as_ref(),
        &r.cfg.classifier,
        &weights,
        r.cfg.seed,
    )
    .map_err(runtime)?;

    let mut predictions = Vec::with_capacity(dataset.len());
    for doc_units in &units {
        let (label, _) = ckpt.classify(doc_units, embeddings.as_ref()).map_err(runtime)?;
        predictions.push(label);
    }
    let metrics = f_score(&predictions, &labels).map_err(runtime)?;

    let out = checkpoint_path(&r.cfg.out_dir, condition, scheme, model);
    let mut buf = Vec::new();
    save_checkpoint(&ckpt, &mut buf).map_err(runtime)?;
    write_file(&out, &buf)?;
    println!(
        "wrote {} (train F1 {:.3} on {} documents; fit diagnostic, not cross-validated)",
        out.display(),
        metrics.f1_positive,
        dataset.len()
    );
    Ok(0)
}
