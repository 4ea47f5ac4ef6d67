//! tf-idf bag-of-words features.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::models::input::FeatureVector;
use crate::real::Real;

/// Fitted tf-idf statistics. Terms are indexed in lexicographic order;
/// idf(term) = ln((1 + N)/(1 + df)) + 1 with N the fitted document count.
/// Transforms drop unseen terms and L2-normalize each document vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    n_docs: usize,
}

impl TfidfModel {
    pub fn fit(docs: &[Vec<String>]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Param("tf-idf needs a non-empty corpus".into()));
        }
        let mut df: BTreeMap<&String, usize> = BTreeMap::new();
        for doc in docs {
            let mut seen: Vec<&String> = doc.iter().collect();
            seen.sort();
            seen.dedup();
            for term in seen {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let n = docs.len();
        let terms: Vec<String> = df.keys().map(|t| (*t).clone()).collect();
        let idf: Vec<f64> = df
            .values()
            .map(|&d| ((1 + n) as f64 / (1 + d) as f64).ln() + 1.0)
            .collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self { terms, index, idf, n_docs: n })
    }

    /// Rebuild from saved statistics; `terms` must be sorted and unique.
    pub(crate) fn from_parts(terms: Vec<String>, idf: Vec<f64>, n_docs: usize) -> Result<Self> {
        if terms.len() != idf.len() {
            return Err(Error::Shape(format!(
                "{} terms for {} idf values",
                terms.len(),
                idf.len()
            )));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Param("tf-idf terms must be sorted and unique".into()));
        }
        if !idf.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric("non-finite idf value".into()));
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self { terms, index, idf, n_docs })
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn idf_of(&self, term: &str) -> Option<f64> {
        self.index.get(term).map(|&i| self.idf[i])
    }

    /// Sparse tf·idf vector, L2-normalized. Unknown terms are dropped; a
    /// document with no known terms maps to the zero vector.
    pub fn transform<R: Real>(&self, units: &[String]) -> FeatureVector<R> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for u in units {
            if let Some(&i) = self.index.get(u) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let mut indices = Vec::with_capacity(counts.len());
        let mut values: Vec<f64> = Vec::with_capacity(counts.len());
        for (i, tf) in counts {
            indices.push(i);
            values.push(tf as f64 * self.idf[i]);
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut values {
                *v /= norm;
            }
        }
        FeatureVector::Sparse {
            dim: self.dim(),
            indices,
            values: values.into_iter().map(R::from_f64).collect(),
        }
    }
}
