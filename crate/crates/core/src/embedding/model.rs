//! Embedding matrices and the text interchange format.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::embedding::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::features::FeatureScheme;
use crate::real::Real;
use crate::util::{mix_seed, seeded_rng};

const SALT_INIT: u64 = 0x494e_4954;

/// Target matrix `w` plus context matrix `c`, both row-major `V x d`.
/// Only `w` is the published embedding; `c` exists for training and is
/// never serialized.
#[derive(Debug, Clone)]
pub struct EmbeddingModel<R: Real> {
    pub(crate) w: Vec<R>,
    pub(crate) c: Vec<R>,
    d: usize,
    targets: Vocabulary,
    contexts: Vocabulary,
    scheme: Option<FeatureScheme>,
}

impl<R: Real> EmbeddingModel<R> {
    /// Fresh model: `w` uniform in [-0.5/d, 0.5/d], `c` zero. Draws happen
    /// in f64 so f32 and f64 models start from the same stream.
    pub fn new_seeded(
        targets: Vocabulary,
        contexts: Vocabulary,
        d: usize,
        seed: u64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Param("embedding dimension must be >= 1".into()));
        }
        let mut rng = seeded_rng(mix_seed(seed, SALT_INIT));
        let span = 0.5 / d as f64;
        let w = (0..targets.len() * d)
            .map(|_| R::from_f64(rng.gen_range(-span..span)))
            .collect();
        let c = vec![R::zero(); contexts.len() * d];
        Ok(Self { w, c, d, targets, contexts, scheme: None })
    }

    pub fn with_scheme(mut self, scheme: Option<FeatureScheme>) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn scheme(&self) -> Option<FeatureScheme> {
        self.scheme
    }

    pub fn targets(&self) -> &Vocabulary {
        &self.targets
    }

    pub fn contexts(&self) -> &Vocabulary {
        &self.contexts
    }

    pub fn row(&self, idx: usize) -> &[R] {
        &self.w[idx * self.d..(idx + 1) * self.d]
    }

    /// Published vector for a unit, if in vocabulary.
    pub fn embedding(&self, unit: &str) -> Option<&[R]> {
        self.targets.index_of(unit).map(|i| self.row(i))
    }

    /// Cosine similarity between two units' target vectors.
    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        Some(cosine(self.embedding(a)?, self.embedding(b)?))
    }

    /// Reject any non-finite weight (post-training sanity gate).
    pub fn finite_check(&self) -> Result<()> {
        for (name, m) in [("target", &self.w), ("context", &self.c)] {
            if let Some(pos) = m.iter().position(|x| !x.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite value in {name} matrix at flat index {pos}"
                )));
            }
        }
        Ok(())
    }

    /// Write the target matrix in word2vec text format: a `V d` header,
    /// then one `unit x1 .. xd` row per unit in index order.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.targets.len(), self.d)?;
        for i in 0..self.targets.len() {
            out.write_all(self.targets.unit(i).as_bytes())?;
            for x in self.row(i) {
                write!(out, " {:.8e}", x)?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Read a model written by [`save`](Self::save). Context weights are
    /// not part of the format; the loaded model is for lookup only.
    pub fn load<B: BufRead>(reader: B) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Format {
            line: 1,
            message: "empty embedding file".into(),
        })?;
        let header = header?;
        let mut parts = header.split_whitespace();
        let (v, d) = match (parts.next(), parts.next(), parts.next()) {
            (Some(v), Some(d), None) => {
                let v: usize = v.parse().map_err(|_| Error::Format {
                    line: 1,
                    message: format!("bad vocabulary size {v:?}"),
                })?;
                let d: usize = d.parse().map_err(|_| Error::Format {
                    line: 1,
                    message: format!("bad dimension {d:?}"),
                })?;
                (v, d)
            }
            _ => {
                return Err(Error::Format {
                    line: 1,
                    message: "header must be `<vocab> <dim>`".into(),
                })
            }
        };
        if v == 0 {
            return Err(Error::EmptyVocab("embedding file declares zero units".into()));
        }
        if d == 0 {
            return Err(Error::Format {
                line: 1,
                message: "dimension must be >= 1".into(),
            });
        }
        let mut units = Vec::with_capacity(v);
        let mut w = Vec::with_capacity(v * d);
        for (lineno, line) in &mut lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let unit = cols.next().unwrap_or_default().to_string();
            let before = w.len();
            for col in cols {
                let x: R = col.parse().map_err(|_| Error::Format {
                    line: lineno + 1,
                    message: format!("bad float {col:?}"),
                })?;
                w.push(x);
            }
            if w.len() - before != d {
                return Err(Error::Format {
                    line: lineno + 1,
                    message: format!("expected {d} values, found {}", w.len() - before),
                });
            }
            units.push(unit);
            if units.len() == v {
                break;
            }
        }
        if units.len() != v {
            return Err(Error::Format {
                line: units.len() + 1,
                message: format!("expected {v} rows, found {}", units.len()),
            });
        }
        for (lineno, line) in lines {
            if !line?.is_empty() {
                return Err(Error::Format {
                    line: lineno + 1,
                    message: "trailing content after declared rows".into(),
                });
            }
        }
        let targets = Vocabulary::from_indexed_units(units)?;
        let contexts = targets.clone();
        let c = vec![R::zero(); contexts.len() * d];
        Ok(Self { w, c, d, targets, contexts, scheme: None })
    }
}

/// Cosine similarity with a zero-norm guard (zero vectors score 0).
pub fn cosine<R: Real>(a: &[R], b: &[R]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x.to_f64(), y.to_f64());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    fn vocab(units: &[(&str, u64)]) -> Vocabulary {
        let counts: BTreeMap<String, u64> =
            units.iter().map(|(u, c)| (u.to_string(), *c)).collect();
        Vocabulary::from_counts(&counts, 1).unwrap()
    }

    fn tiny() -> EmbeddingModel<f64> {
        let v = vocab(&[("alpha", 5), ("beta", 3), ("gamma", 2)]);
        EmbeddingModel::new_seeded(v.clone(), v, 4, 11).unwrap()
    }

    #[test]
    fn init_ranges_and_zero_contexts() {
        let m = tiny();
        let bound = 0.5 / 4.0;
        assert!(m.w.iter().all(|&x| x.abs() < bound));
        assert!(m.w.iter().any(|&x| x != 0.0));
        assert!(m.c.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn seeding_is_reproducible() {
        let a = tiny();
        let b = tiny();
        assert_eq!(a.w, b.w);
        let v = vocab(&[("alpha", 5), ("beta", 3), ("gamma", 2)]);
        let other = EmbeddingModel::<f64>::new_seeded(v.clone(), v, 4, 12).unwrap();
        assert_ne!(a.w, other.w);
    }

    #[test]
    fn cosine_of_self_is_one() {
        let m = tiny();
        assert_relative_eq!(m.cosine("alpha", "alpha").unwrap(), 1.0, epsilon = 1e-12);
        assert!(m.cosine("alpha", "missing").is_none());
        // hand oracle: (1,0)·(0,2) = 0; (1,1)·(2,2)/ (sqrt2 * sqrt8) = 4/4 = 1
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 2.0]), 0.0);
        assert_relative_eq!(cosine(&[1.0, 1.0], &[2.0, 2.0]), 1.0, epsilon = 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn save_load_round_trip_is_stable() {
        let m = tiny();
        let mut first = Vec::new();
        m.save(&mut first).unwrap();
        let loaded = EmbeddingModel::<f64>::load(first.as_slice()).unwrap();
        assert_eq!(loaded.dim(), 4);
        assert_eq!(loaded.targets().units(), m.targets().units());
        let mut second = Vec::new();
        loaded.save(&mut second).unwrap();
        assert_eq!(first, second, "format must be a fixed point of save/load");
    }

    #[test]
    fn loaded_values_match_within_format_precision() {
        let m = tiny();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let loaded = EmbeddingModel::<f64>::load(buf.as_slice()).unwrap();
        for unit in ["alpha", "beta", "gamma"] {
            for (a, b) in m.embedding(unit).unwrap().iter().zip(loaded.embedding(unit).unwrap()) {
                assert_relative_eq!(a, b, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn load_reports_bad_rows_with_line_numbers() {
        let text = "2 3\nalpha 1.0 2.0 3.0\nbeta 1.0 oops 3.0\n";
        match EmbeddingModel::<f64>::load(text.as_bytes()).unwrap_err() {
            Error::Format { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let short = "2 3\nalpha 1.0 2.0\n";
        assert!(matches!(
            EmbeddingModel::<f64>::load(short.as_bytes()).unwrap_err(),
            Error::Format { line: 2, .. }
        ));
        let missing = "2 3\nalpha 1.0 2.0 3.0\n";
        assert!(matches!(
            EmbeddingModel::<f64>::load(missing.as_bytes()).unwrap_err(),
            Error::Format { .. }
        ));
    }

    #[test]
    fn finite_check_catches_nan() {
        let mut m = tiny();
        assert!(m.finite_check().is_ok());
        m.w[3] = f64::NAN;
        assert!(matches!(m.finite_check().unwrap_err(), Error::Numeric(_)));
    }
}
