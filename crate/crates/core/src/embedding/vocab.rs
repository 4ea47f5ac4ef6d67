//! Unit vocabulary with frequency-ranked indices.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// An indexed vocabulary. Index order is descending count with
/// lexicographic tie-break, so index 0 is the most frequent unit and the
/// assignment is independent of insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    units: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Build from unit counts, dropping units rarer than `min_count`.
    pub fn from_counts(counts: &BTreeMap<String, u64>, min_count: u64) -> Result<Self> {
        let mut entries: Vec<(&String, u64)> = counts
            .iter()
            .filter(|(_, &c)| c >= min_count.max(1))
            .map(|(u, &c)| (u, c))
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocab(format!(
                "no unit reaches min_count {min_count}"
            )));
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let units: Vec<String> = entries.iter().map(|(u, _)| (*u).clone()).collect();
        let counts: Vec<u64> = entries.iter().map(|(_, c)| *c).collect();
        let index = units
            .iter()
            .enumerate()
            .map(|(i, u)| (u.clone(), i))
            .collect();
        Ok(Self { units, counts, index })
    }

    /// Count units across streams and build in one go.
    pub fn build<'a, I, S>(streams: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a String>,
    {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for stream in streams {
            for unit in stream {
                *counts.entry(unit.clone()).or_insert(0) += 1;
            }
        }
        Self::from_counts(&counts, min_count)
    }

    /// Adopt an externally fixed ordering (for deserialized models).
    /// Counts are unknown and recorded as zero.
    pub fn from_indexed_units(units: Vec<String>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyVocab("no units given".into()));
        }
        let mut index = HashMap::with_capacity(units.len());
        for (i, u) in units.iter().enumerate() {
            if index.insert(u.clone(), i).is_some() {
                return Err(Error::Format {
                    line: i + 2,
                    message: format!("duplicate unit {u:?}"),
                });
            }
        }
        let counts = vec![0; units.len()];
        Ok(Self { units, counts, index })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn index_of(&self, unit: &str) -> Option<usize> {
        self.index.get(unit).copied()
    }

    pub fn unit(&self, idx: usize) -> &str {
        &self.units[idx]
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total retained token count (sum of unit counts).
    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}
