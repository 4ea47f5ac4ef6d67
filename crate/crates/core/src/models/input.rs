//! Document representations fed to the classifiers.

use ndarray::{Array1, Array2};

use crate::embedding::{EmbeddingModel, Vocabulary};
use crate::error::{Error, Result};
use crate::real::Real;

/// Dense or sparse feature vector (SVM input).
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureVector<R: Real> {
    Dense(Array1<R>),
    /// Strictly increasing indices into a `dim`-wide space.
    Sparse { dim: usize, indices: Vec<usize>, values: Vec<R> },
}

impl<R: Real> FeatureVector<R> {
    pub fn dim(&self) -> usize {
        match self {
            FeatureVector::Dense(v) => v.len(),
            FeatureVector::Sparse { dim, .. } => *dim,
        }
    }

    pub fn dot(&self, w: &Array1<R>) -> R {
        match self {
            FeatureVector::Dense(v) => v.iter().zip(w).map(|(&a, &b)| a * b).sum(),
            FeatureVector::Sparse { indices, values, .. } => indices
                .iter()
                .zip(values)
                .map(|(&i, &x)| x * w[i])
                .sum(),
        }
    }

    /// target += s * self
    pub fn add_scaled_to(&self, target: &mut Array1<R>, s: R) {
        match self {
            FeatureVector::Dense(v) => {
                for (t, &x) in target.iter_mut().zip(v) {
                    *t += s * x;
                }
            }
            FeatureVector::Sparse { indices, values, .. } => {
                for (&i, &x) in indices.iter().zip(values) {
                    target[i] += s * x;
                }
            }
        }
    }
}

/// Mean of the in-vocabulary unit vectors; zero vector when nothing hits.
pub fn doc_mean_vector<R: Real>(units: &[String], emb: &EmbeddingModel<R>) -> Array1<R> {
    let mut acc = Array1::zeros(emb.dim());
    let mut hits = 0usize;
    for u in units {
        if let Some(row) = emb.embedding(u) {
            for (a, &x) in acc.iter_mut().zip(row) {
                *a += x;
            }
            hits += 1;
        }
    }
    if hits > 0 {
        let inv = R::one() / R::from_f64(hits as f64);
        acc.mapv_inplace(|x| x * inv);
    }
    acc
}

/// First `maxlen` in-vocabulary units stacked as rows; the returned length
/// counts the valid leading rows (the rest stay zero).
pub fn doc_padded_matrix<R: Real>(
    units: &[String],
    emb: &EmbeddingModel<R>,
    maxlen: usize,
) -> (Array2<R>, usize) {
    let mut x = Array2::zeros((maxlen, emb.dim()));
    let mut len = 0usize;
    for u in units {
        if len == maxlen {
            break;
        }
        if let Some(row) = emb.embedding(u) {
            for (t, &v) in x.row_mut(len).iter_mut().zip(row) {
                *t = v;
            }
            len += 1;
        }
    }
    (x, len)
}

/// Vocabulary for trainable (ad-hoc) embedding tables. Index 0 is the
/// reserved padding index; real units start at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AdhocVocab {
    inner: Vocabulary,
}

impl AdhocVocab {
    pub fn from_units<'a, I, S>(streams: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a String>,
    {
        Ok(Self { inner: Vocabulary::build(streams, 1)? })
    }

    /// Table height: units plus the padding row.
    /// Rebuild from a saved unit list, keeping the given order.
    pub fn from_ordered(units: Vec<String>) -> Result<Self> {
        Ok(Self { inner: Vocabulary::from_indexed_units(units)? })
    }

    pub fn table_len(&self) -> usize {
        self.inner.len() + 1
    }

    pub fn index_of(&self, unit: &str) -> Option<usize> {
        self.inner.index_of(unit).map(|i| i + 1)
    }

    /// Units in table order; row `i + 1` of the table belongs to unit `i`.
    pub fn units(&self) -> &[String] {
        self.inner.units()
    }
}

/// First `maxlen` known units as table indices, padded with 0.
pub fn doc_index_sequence(units: &[String], vocab: &AdhocVocab, maxlen: usize) -> (Vec<usize>, usize) {
    let mut idx = vec![0usize; maxlen];
    let mut len = 0usize;
    for u in units {
        if len == maxlen {
            break;
        }
        if let Some(i) = vocab.index_of(u) {
            idx[len] = i;
            len += 1;
        }
    }
    (idx, len)
}

/// One classifier input.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelInput<R: Real> {
    /// SVM features (pooled vector or tf-idf).
    Vector(FeatureVector<R>),
    /// Padded embedding matrix with its valid-row count (pretrained nets).
    Matrix { x: Array2<R>, len: usize },
    /// Padded index sequence into a trainable table (ad-hoc nets).
    Indices { idx: Vec<usize>, len: usize },
}

impl<R: Real> ModelInput<R> {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelInput::Vector(_) => "vector",
            ModelInput::Matrix { .. } => "matrix",
            ModelInput::Indices { .. } => "indices",
        }
    }
}

pub(crate) fn wrong_input(expected: &str, got: &ModelInput<impl Real>) -> Error {
    Error::Shape(format!("expected {expected} input, got {}", got.kind()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{PairCorpus, TrainConfig};
    use approx::assert_relative_eq;
    use ndarray::array;

    fn strs(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn toy_embeddings() -> EmbeddingModel<f64> {
        // miniature trained model: vocabulary {a, b, c} with d = 2
        let sentences = vec![strs(&["a", "b", "c", "a", "b", "c"]); 4];
        let cfg = TrainConfig {
            d: 2,
            window: 1,
            negatives: 1,
            epochs: 1,
            min_count: 1,
            subsample_t: 0.0,
            ..TrainConfig::default()
        };
        crate::embedding::train_embeddings(&PairCorpus::window_fixed(sentences), &cfg, None)
            .unwrap()
    }

    #[test]
    fn sparse_and_dense_dot_agree() {
        let w = array![1.0, 2.0, 3.0, 4.0];
        let dense = FeatureVector::Dense(array![0.0, 1.0, 0.0, 0.5]);
        let sparse = FeatureVector::Sparse {
            dim: 4,
            indices: vec![1, 3],
            values: vec![1.0, 0.5],
        };
        assert_relative_eq!(dense.dot(&w), sparse.dot(&w), epsilon = 1e-15);
        assert_relative_eq!(dense.dot(&w), 4.0, epsilon = 1e-15);
        let mut acc = Array1::zeros(4);
        sparse.add_scaled_to(&mut acc, 2.0);
        assert_eq!(acc, array![0.0, 2.0, 0.0, 1.0]);
    }

    #[test]
    fn mean_vector_oracles() {
        let emb = toy_embeddings();
        let va = emb.embedding("a").unwrap().to_vec();
        // mean of identical vectors is the vector itself
        let m = doc_mean_vector(&strs(&["a", "a"]), &emb);
        assert_relative_eq!(m[0], va[0], epsilon = 1e-15);
        assert_relative_eq!(m[1], va[1], epsilon = 1e-15);
        // mean of two vectors is the midpoint
        let vb = emb.embedding("b").unwrap().to_vec();
        let m = doc_mean_vector(&strs(&["a", "b"]), &emb);
        assert_relative_eq!(m[0], 0.5 * (va[0] + vb[0]), epsilon = 1e-15);
        // nothing in vocabulary: zero
        let z = doc_mean_vector(&strs(&["zzz"]), &emb);
        assert!(z.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn padded_matrix_truncates_and_pads() {
        let emb = toy_embeddings();
        let (x, len) = doc_padded_matrix(&strs(&["a", "b"]), &emb, 4);
        assert_eq!((x.nrows(), x.ncols(), len), (4, 2, 2));
        assert!(x.row(2).iter().all(|&v| v == 0.0));
        assert!(x.row(3).iter().all(|&v| v == 0.0));
        let (_, len) = doc_padded_matrix(&strs(&["a", "b", "c", "a", "b"]), &emb, 4);
        assert_eq!(len, 4, "truncation beyond maxlen");
        let (x, len) = doc_padded_matrix(&strs(&["zzz"]), &emb, 3);
        assert_eq!(len, 0);
        assert!(x.iter().all(|&v| v == 0.0));
        // OOV units are skipped, not padded mid-document
        let (x, len) = doc_padded_matrix(&strs(&["a", "zzz", "b"]), &emb, 4);
        assert_eq!(len, 2);
        assert!(x.row(1).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn adhoc_vocab_reserves_padding_index() {
        let docs = [strs(&["x", "y", "x"]), strs(&["y", "z"])];
        let v = AdhocVocab::from_units(docs.iter().map(|d| d.as_slice())).unwrap();
        assert_eq!(v.table_len(), 4);
        assert!(v.index_of("x").unwrap() >= 1);
        assert_eq!(v.index_of("missing"), None);
        let (idx, len) = doc_index_sequence(&strs(&["x", "missing", "z"]), &v, 4);
        assert_eq!(len, 2);
        assert_eq!(idx.len(), 4);
        assert_eq!(idx[2], 0);
        assert_eq!(idx[3], 0);
        assert_ne!(idx[0], 0);
    }
}
