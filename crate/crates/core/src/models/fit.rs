//! Fitting a classifier on a document subset and encoding documents for a
//! fitted one. Everything a fold (or a full training run) derives from its
//! training documents — tf-idf statistics, the ad-hoc vocabulary, the model
//! itself — is produced here from `train_idx` alone, so held-out documents
//! can never leak into the fit.

use crate::corpus::Label;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::real::Real;

use super::{
    doc_index_sequence, doc_mean_vector, doc_padded_matrix, predict, train_network_model,
    train_svm, AdhocVocab, Checkpoint, ClassWeights, ClassifierConfig, Condition, FeatureVector,
    ModelArch, ModelInput, NetworkModel, TfidfModel,
};

fn check_units(units: &[Vec<String>], labels: &[Label], train_idx: &[usize]) -> Result<()> {
    if units.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} unit streams for {} labels",
            units.len(),
            labels.len()
        )));
    }
    if train_idx.is_empty() {
        return Err(Error::Param("empty training subset".into()));
    }
    if let Some(&bad) = train_idx.iter().find(|&&i| i >= units.len()) {
        return Err(Error::Param(format!(
            "training index {bad} out of range for {} documents",
            units.len()
        )));
    }
    Ok(())
}

/// Train one classifier on the documents selected by `train_idx`.
///
/// `units` holds the per-document unit streams for the scheme under test.
/// Pretrained fits require `embeddings`; ad-hoc fits must not receive any
/// and instead learn their feature space (tf-idf for the SVM, an embedding
/// table for the networks) from the training documents.
pub fn fit_classifier<R: Real>(
    arch: ModelArch,
    condition: Condition,
    units: &[Vec<String>],
    labels: &[Label],
    train_idx: &[usize],
    embeddings: Option<&EmbeddingModel<R>>,
    cfg: &ClassifierConfig,
    weights: &ClassWeights,
    seed: u64,
) -> Result<Checkpoint<R>> {
    cfg.validate()?;
    check_units(units, labels, train_idx)?;
    match condition {
        Condition::Pretrained if embeddings.is_none() => {
            return Err(Error::Config(
                "the pretrained condition needs an embedding model".into(),
            ));
        }
        Condition::Adhoc if embeddings.is_some() => {
            return Err(Error::Config(
                "the ad-hoc condition takes no embedding model".into(),
            ));
        }
        _ => {}
    }
    let train_labels: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();

    let (model, vocab, tfidf) = match (arch, condition) {
        (ModelArch::Svm, Condition::Pretrained) => {
            let emb = embeddings.unwrap();
            let xs: Vec<FeatureVector<R>> = train_idx
                .iter()
                .map(|&i| FeatureVector::Dense(doc_mean_vector(&units[i], emb)))
                .collect();
            let svm = train_svm(&xs, &train_labels, weights, &cfg.svm, seed)?;
            (NetworkModel::Svm(svm), None, None)
        }
        (ModelArch::Svm, Condition::Adhoc) => {
            let train_units: Vec<Vec<String>> =
                train_idx.iter().map(|&i| units[i].clone()).collect();
            let tfidf = TfidfModel::fit(&train_units)?;
            let xs: Vec<FeatureVector<R>> = train_idx
                .iter()
                .map(|&i| tfidf.transform(&units[i]))
                .collect();
            let svm = train_svm(&xs, &train_labels, weights, &cfg.svm, seed)?;
            (NetworkModel::Svm(svm), None, Some(tfidf))
        }
        (net_arch, Condition::Pretrained) => {
            let emb = embeddings.unwrap();
            let inputs: Vec<ModelInput<R>> = train_idx
                .iter()
                .map(|&i| {
                    let (x, len) = doc_padded_matrix(&units[i], emb, cfg.maxlen);
                    ModelInput::Matrix { x, len }
                })
                .collect();
            let (model, _) = train_network_model(
                net_arch,
                emb.dim(),
                None,
                cfg,
                &inputs,
                &train_labels,
                weights,
                seed,
            )?;
            (model, None, None)
        }
        (net_arch, Condition::Adhoc) => {
            let vocab = AdhocVocab::from_units(train_idx.iter().map(|&i| &units[i]))?;
            let inputs: Vec<ModelInput<R>> = train_idx
                .iter()
                .map(|&i| {
                    let (idx, len) = doc_index_sequence(&units[i], &vocab, cfg.maxlen);
                    ModelInput::Indices { idx, len }
                })
                .collect();
            let (model, _) = train_network_model(
                net_arch,
                cfg.adhoc_d,
                Some(vocab.table_len()),
                cfg,
                &inputs,
                &train_labels,
                weights,
                seed,
            )?;
            (model, Some(vocab), None)
        }
    };
    Ok(Checkpoint { model, condition, vocab, tfidf })
}

impl<R: Real> Checkpoint<R> {
    /// Encode one document's unit stream the way this classifier was
    /// trained to consume it. Pretrained classifiers need the same
    /// embedding model they were fitted with.
    pub fn encode(
        &self,
        units: &[String],
        embeddings: Option<&EmbeddingModel<R>>,
    ) -> Result<ModelInput<R>> {
        let need_emb = || {
            embeddings.ok_or_else(|| {
                Error::Config("a pretrained classifier needs its embedding model".into())
            })
        };
        match &self.model {
            NetworkModel::Svm(_) => match &self.tfidf {
                Some(tf) => Ok(ModelInput::Vector(tf.transform(units))),
                None => Ok(ModelInput::Vector(FeatureVector::Dense(doc_mean_vector(
                    units,
                    need_emb()?,
                )))),
            },
            net => {
                let maxlen = net
                    .maxlen()
                    .expect("network models always carry a maxlen");
                match &self.vocab {
                    Some(vocab) => {
                        let (idx, len) = doc_index_sequence(units, vocab, maxlen);
                        Ok(ModelInput::Indices { idx, len })
                    }
                    None => {
                        let (x, len) = doc_padded_matrix(units, need_emb()?, maxlen);
                        Ok(ModelInput::Matrix { x, len })
                    }
                }
            }
        }
    }

    /// Encode and classify one document.
    pub fn classify(
        &self,
        units: &[String],
        embeddings: Option<&EmbeddingModel<R>>,
    ) -> Result<(Label, f64)> {
        predict(&self.model, &self.encode(units, embeddings)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingModel;
    use crate::features::FeatureScheme;

    fn toy_units() -> (Vec<Vec<String>>, Vec<Label>) {
        let doc = |s: &str| s.split(' ').map(str::to_string).collect::<Vec<_>>();
        let units = vec![
            doc("dolor dolor malum"),
            doc("malum dolor ira"),
            doc("ira malum dolor malum"),
            doc("pax lumen hortus"),
            doc("hortus pax flumen"),
            doc("flumen lumen pax hortus"),
        ];
        let labels = vec![
            Label::Harmful,
            Label::Harmful,
            Label::Harmful,
            Label::Clean,
            Label::Clean,
            Label::Clean,
        ];
        (units, labels)
    }

    fn toy_embeddings(units: &[Vec<String>], d: usize) -> EmbeddingModel<f64> {
        // deterministic distinct rows via the text interchange format
        let mut all: Vec<String> = units.iter().flatten().cloned().collect();
        all.sort();
        all.dedup();
        let mut text = format!("{} {d}\n", all.len());
        for (i, u) in all.iter().enumerate() {
            text.push_str(u);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..d {
                let v = sign * (i as f64 + 1.0) * 0.1 + j as f64 * 0.01;
                text.push_str(&format!(" {v}"));
            }
            text.push('\n');
        }
        EmbeddingModel::load(text.as_bytes())
            .unwrap()
            .with_scheme(Some(FeatureScheme::Tok))
    }

    fn small_cfg() -> ClassifierConfig {
        ClassifierConfig {
            maxlen: 5,
            hidden: 8,
            filters: 2,
            lstm_hidden: 4,
            dropout: 0.0,
            batch_size: 3,
            epochs: 30,
            adhoc_d: 6,
            ..ClassifierConfig::default()
        }
    }

    #[test]
    fn adhoc_svm_fit_separates_and_carries_tfidf() {
        let (units, labels) = toy_units();
        let idx: Vec<usize> = (0..units.len()).collect();
        let cp = fit_classifier::<f64>(
            ModelArch::Svm,
            Condition::Adhoc,
            &units,
            &labels,
            &idx,
            None,
            &small_cfg(),
            &ClassWeights::balanced(),
            11,
        )
        .unwrap();
        assert!(cp.tfidf.is_some());
        assert!(cp.vocab.is_none());
        for (u, l) in units.iter().zip(&labels) {
            let (pred, score) = cp.classify(u, None).unwrap();
            assert_eq!(pred, *l, "misclassified {u:?} (score {score})");
        }
        // unseen-but-harmful vocabulary still routes through the fitted tf-idf
        let probe = vec!["malum".to_string(), "ignotum".to_string()];
        let (pred, _) = cp.classify(&probe, None).unwrap();
        assert_eq!(pred, Label::Harmful);
    }

    #[test]
    fn pretrained_svm_fit_uses_mean_vectors() {
        let (units, labels) = toy_units();
        let emb = toy_embeddings(&units, 4);
        let idx: Vec<usize> = (0..units.len()).collect();
        let cp = fit_classifier(
            ModelArch::Svm,
            Condition::Pretrained,
            &units,
            &labels,
            &idx,
            Some(&emb),
            &small_cfg(),
            &ClassWeights::balanced(),
            11,
        )
        .unwrap();
        assert!(cp.tfidf.is_none() && cp.vocab.is_none());
        // encoding must agree with the direct mean-vector construction
        let enc = cp.encode(&units[0], Some(&emb)).unwrap();
        let direct = ModelInput::Vector(FeatureVector::Dense(doc_mean_vector(&units[0], &emb)));
        assert_eq!(enc, direct);
        // classifying without the embeddings is a configuration error
        assert!(matches!(cp.classify(&units[0], None), Err(Error::Config(_))));
    }

    #[test]
    fn adhoc_network_fit_learns_the_toy_split() {
        let (units, labels) = toy_units();
        let idx: Vec<usize> = (0..units.len()).collect();
        for arch in [ModelArch::Mlp, ModelArch::Cnn, ModelArch::Lstm] {
            let cp = fit_classifier::<f64>(
                arch,
                Condition::Adhoc,
                &units,
                &labels,
                &idx,
                None,
                &small_cfg(),
                &ClassWeights::balanced(),
                17,
            )
            .unwrap();
            assert!(cp.vocab.is_some(), "{arch:?} should carry its vocabulary");
            let hits = units
                .iter()
                .zip(&labels)
                .filter(|(u, l)| cp.classify(u, None).unwrap().0 == **l)
                .count();
            assert!(hits >= 5, "{arch:?} fit only {hits}/6 training documents");
        }
    }

    #[test]
    fn pretrained_network_encoding_matches_padded_matrix() {
        let (units, labels) = toy_units();
        let emb = toy_embeddings(&units, 6);
        let idx: Vec<usize> = (0..units.len()).collect();
        let cp = fit_classifier(
            ModelArch::Mlp,
            Condition::Pretrained,
            &units,
            &labels,
            &idx,
            Some(&emb),
            &small_cfg(),
            &ClassWeights::balanced(),
            3,
        )
        .unwrap();
        let enc = cp.encode(&units[2], Some(&emb)).unwrap();
        let (x, len) = doc_padded_matrix(&units[2], &emb, 5);
        assert_eq!(enc, ModelInput::Matrix { x, len });
    }

    #[test]
    fn training_subset_controls_the_fit() {
        let (units, labels) = toy_units();
        // only documents 0..4: vocabulary must not contain units exclusive to 4/5
        let cp = fit_classifier::<f64>(
            ModelArch::Mlp,
            Condition::Adhoc,
            &units,
            &labels,
            &[0, 1, 2, 3],
            None,
            &small_cfg(),
            &ClassWeights::balanced(),
            5,
        )
        .unwrap();
        let vocab = cp.vocab.as_ref().unwrap();
        assert!(vocab.index_of("flumen").is_none());
        assert!(vocab.index_of("dolor").is_some());
    }

    #[test]
    fn condition_and_embedding_mismatches_are_config_errors() {
        let (units, labels) = toy_units();
        let emb = toy_embeddings(&units, 4);
        let idx: Vec<usize> = (0..units.len()).collect();
        let cfg = small_cfg();
        let w = ClassWeights::balanced();
        let missing = fit_classifier::<f64>(
            ModelArch::Svm,
            Condition::Pretrained,
            &units,
            &labels,
            &idx,
            None,
            &cfg,
            &w,
            1,
        );
        assert!(matches!(missing, Err(Error::Config(_))));
        let spurious = fit_classifier(
            ModelArch::Svm,
            Condition::Adhoc,
            &units,
            &labels,
            &idx,
            Some(&emb),
            &cfg,
            &w,
            1,
        );
        assert!(matches!(spurious, Err(Error::Config(_))));
        let empty = fit_classifier::<f64>(
            ModelArch::Svm,
            Condition::Adhoc,
            &units,
            &labels,
            &[],
            None,
            &cfg,
            &w,
            1,
        );
        assert!(matches!(empty, Err(Error::Param(_))));
        let oob = fit_classifier::<f64>(
            ModelArch::Svm,
            Condition::Adhoc,
            &units,
            &labels,
            &[99],
            None,
            &cfg,
            &w,
            1,
        );
        assert!(matches!(oob, Err(Error::Param(_))));
    }
}
