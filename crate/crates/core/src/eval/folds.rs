//! Stratified fold assignment and class-weight derivation.

use rand::seq::SliceRandom;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::models::ClassWeights;
use crate::util::{mix_seed, seeded_rng};

const SALT_FOLDS: u64 = 0x464f_4c44;

/// Document-to-fold assignment for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    assignment: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn fold_of(&self, doc: usize) -> usize {
        self.assignment[doc]
    }

    /// Documents held out by fold `f`, in document order.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == f)
            .map(|(i, _)| i)
            .collect()
    }

    /// Documents trained on by fold `f`, in document order.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a != f)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment: within each label the documents are
/// seeded-shuffled and dealt round-robin, with the dealing cursor carried
/// across labels so overall fold sizes also differ by at most one.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Param(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Param(format!(
            "cannot cut {} documents into {k} folds",
            labels.len()
        )));
    }
    let mut rng = seeded_rng(mix_seed(seed, SALT_FOLDS));
    let mut assignment = vec![0usize; labels.len()];
    let mut cursor = 0usize;
    for label in [Label::Clean, Label::Harmful] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect();
        if !members.is_empty() && members.len() < k {
            log::warn!(
                "label {label} has only {} documents for {k} folds; some test folds will miss it",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for doc in members {
            assignment[doc] = cursor % k;
            cursor += 1;
        }
    }
    Ok(FoldAssignment { assignment, k })
}

/// Inverse-frequency class weights: w(label) = N / (2 * N_label), so a
/// balanced corpus weighs both classes 1.
pub fn derive_class_weights(labels: &[Label]) -> Result<ClassWeights> {
    let harmful = labels.iter().filter(|l| l.is_harmful()).count();
    let clean = labels.len() - harmful;
    if harmful == 0 || clean == 0 {
        return Err(Error::Degenerate(format!(
            "need both labels to derive class weights ({clean} clean, {harmful} harmful)"
        )));
    }
    let n = labels.len() as f64;
    Ok(ClassWeights {
        clean: n / (2.0 * clean as f64),
        harmful: n / (2.0 * harmful as f64),
    })
}
