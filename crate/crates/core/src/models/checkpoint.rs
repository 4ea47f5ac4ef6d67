//! Text checkpoint format for trained classifiers.
//!
//! ```text
//! lingemb checkpoint 1
//! {"arch":"MLP","condition":"adhoc", ...}
//! tensor w1 4 8
//! <8 values per row, 17 significant digits>
//! ...
//! end
//! ```
//!
//! The meta line carries everything needed to rebuild the model shell
//! (dimensions, dropout, the ad-hoc unit list or tf-idf terms); tensors
//! carry the learned values. Floats are written with enough digits to
//! round-trip exactly.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::input::AdhocVocab;
use crate::models::net::Params;
use crate::models::tfidf::TfidfModel;
use crate::models::{
    cnn, CnnNet, Condition, LstmNet, MlpNet, ModelArch, NetworkModel, SvmModel,
};
use crate::real::Real;

const HEADER: &str = "lingemb checkpoint 1";

/// A trained classifier plus the fitted feature state it depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<R: Real> {
    pub model: NetworkModel<R>,
    pub condition: Condition,
    /// unit list behind an ad-hoc network's embedding table
    pub vocab: Option<AdhocVocab>,
    /// fitted features of the ad-hoc SVM
    pub tfidf: Option<TfidfModel>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    arch: ModelArch,
    condition: Condition,
    maxlen: usize,
    d: usize,
    width: usize,
    dropout: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocab: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tfidf_docs: Option<usize>,
}

fn build_meta<R: Real>(ckpt: &Checkpoint<R>) -> Result<Meta> {
    let adhoc = ckpt.condition == Condition::Adhoc;
    let model_adhoc = ckpt.model.is_adhoc();
    match &ckpt.model {
        NetworkModel::Svm(m) => {
            if ckpt.vocab.is_some() {
                return Err(Error::Config("an SVM checkpoint carries no unit table".into()));
            }
            if adhoc != ckpt.tfidf.is_some() {
                return Err(Error::Config(
                    "ad-hoc SVM checkpoints need tf-idf state, pretrained ones must not have it"
                        .into(),
                ));
            }
            if let Some(tf) = &ckpt.tfidf {
                if tf.dim() != m.dim() {
                    return Err(Error::Shape(format!(
                        "tf-idf dimension {} does not match svm weight dimension {}",
                        tf.dim(),
                        m.dim()
                    )));
                }
            }
            Ok(Meta {
                arch: ModelArch::Svm,
                condition: ckpt.condition,
                maxlen: 0,
                d: m.dim(),
                width: 0,
                dropout: 0.0,
                vocab: ckpt.tfidf.as_ref().map(|t| t.terms().to_vec()),
                tfidf_docs: ckpt.tfidf.as_ref().map(|t| t.n_docs()),
            })
        }
        net => {
            if adhoc != model_adhoc {
                return Err(Error::Config(
                    "checkpoint condition disagrees with the model's ad-hoc flag".into(),
                ));
            }
            if adhoc != ckpt.vocab.is_some() {
                return Err(Error::Config(
                    "ad-hoc network checkpoints need the unit table, pretrained ones must not"
                        .into(),
                ));
            }
            if ckpt.tfidf.is_some() {
                return Err(Error::Config("network checkpoints carry no tf-idf state".into()));
            }
            let (maxlen, d, width, dropout) = match net {
                NetworkModel::Mlp(m) => (m.maxlen, m.d, m.hidden, m.dropout),
                NetworkModel::Cnn(m) => (m.maxlen, m.d, m.filters, m.dropout),
                NetworkModel::Lstm(m) => (m.maxlen, m.d, m.hidden, m.dropout),
                NetworkModel::Svm(_) => unreachable!(),
            };
            if let Some(v) = &ckpt.vocab {
                let table_rows = match net {
                    NetworkModel::Mlp(m) => m.params.values[crate::models::mlp::EMB].nrows(),
                    NetworkModel::Cnn(m) => m.params.values[cnn::EMB].nrows(),
                    NetworkModel::Lstm(m) => m.params.values[crate::models::lstm::EMB].nrows(),
                    NetworkModel::Svm(_) => unreachable!(),
                };
                if v.table_len() != table_rows {
                    return Err(Error::Shape(format!(
                        "unit table of {} rows does not match embedding table of {} rows",
                        v.table_len(),
                        table_rows
                    )));
                }
            }
            Ok(Meta {
                arch: net.arch(),
                condition: ckpt.condition,
                maxlen,
                d,
                width,
                dropout,
                vocab: ckpt.vocab.as_ref().map(|v| v.units().to_vec()),
                tfidf_docs: None,
            })
        }
    }
}

fn write_tensor<R: Real, W: Write>(out: &mut W, name: &str, values: &Array2<R>) -> Result<()> {
    writeln!(out, "tensor {} {} {}", name, values.nrows(), values.ncols())?;
    for row in values.rows() {
        let mut first = true;
        for &v in row {
            if first {
                write!(out, "{:.16e}", v.to_f64())?;
                first = false;
            } else {
                write!(out, " {:.16e}", v.to_f64())?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_checkpoint<R: Real, W: Write>(ckpt: &Checkpoint<R>, mut out: W) -> Result<()> {
    let meta = build_meta(ckpt)?;
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{}", serde_json::to_string(&meta)?)?;
    match &ckpt.model {
        NetworkModel::Svm(m) => {
            let w = Array2::from_shape_fn((1, m.dim()), |(_, j)| m.w[j]);
            write_tensor(&mut out, "w", &w)?;
            write_tensor(&mut out, "b", &Array2::from_elem((1, 1), m.b))?;
            if let Some(tf) = &ckpt.tfidf {
                let idf = Array2::from_shape_fn((1, tf.dim()), |(_, j)| {
                    tf.idf_of(&tf.terms()[j]).expect("term is indexed")
                });
                write_tensor::<f64, _>(&mut out, "idf", &idf)?;
            }
        }
        NetworkModel::Mlp(m) => {
            for (name, v) in m.params.names.iter().zip(&m.params.values) {
                write_tensor(&mut out, name, v)?;
            }
        }
        NetworkModel::Cnn(m) => {
            for (name, v) in m.params.names.iter().zip(&m.params.values) {
                write_tensor(&mut out, name, v)?;
            }
        }
        NetworkModel::Lstm(m) => {
            for (name, v) in m.params.names.iter().zip(&m.params.values) {
                write_tensor(&mut out, name, v)?;
            }
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

struct LoadedTensor {
    name: String,
    line: usize,
    values: Array2<f64>,
}

struct Lines<B> {
    inner: B,
    line: usize,
    buf: String,
}

impl<B: BufRead> Lines<B> {
    fn next(&mut self) -> Result<Option<(usize, &str)>> {
        self.buf.clear();
        let n = self.inner.read_line(&mut self.buf)?;
        if n == 0 {
            return Ok(None);
        }
        self.line += 1;
        let trimmed = self.buf.trim_end_matches(['\n', '\r']);
        // borrow gymnastics: shrink buf to the trimmed length
        let len = trimmed.len();
        self.buf.truncate(len);
        Ok(Some((self.line, self.buf.as_str())))
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &str)> {
        let line = self.line + 1;
        match self.next()? {
            Some(v) => Ok(v),
            None => Err(Error::Format {
                line,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

pub fn load_checkpoint<R: Real, B: BufRead>(reader: B) -> Result<Checkpoint<R>> {
    let mut lines = Lines { inner: reader, line: 0, buf: String::new() };
    let (hline, header) = lines.expect("the checkpoint header")?;
    if header != HEADER {
        return Err(bad(hline, format!("expected '{HEADER}', found '{header}'")));
    }
    let (mline, meta_line) = lines.expect("the meta line")?;
    let meta: Meta = serde_json::from_str(meta_line)
        .map_err(|e| bad(mline, format!("bad meta line: {e}")))?;
    if !(0.0..1.0).contains(&meta.dropout) {
        return Err(bad(mline, format!("dropout {} outside [0, 1)", meta.dropout)));
    }

    let mut tensors: VecDeque<LoadedTensor> = VecDeque::new();
    loop {
        let (line, text) = lines.expect("a tensor block or 'end'")?;
        if text == "end" {
            break;
        }
        let mut parts = text.split_whitespace();
        match parts.next() {
            Some("tensor") => {}
            _ => return Err(bad(line, format!("expected 'tensor ...' or 'end', found '{text}'"))),
        }
        let name = parts
            .next()
            .ok_or_else(|| bad(line, "tensor line missing a name"))?
            .to_string();
        let rows: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(line, "tensor line missing a row count"))?;
        let cols: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(line, "tensor line missing a column count"))?;
        if parts.next().is_some() {
            return Err(bad(line, "trailing content on tensor line"));
        }
        if rows == 0 || cols == 0 {
            return Err(bad(line, "tensors must be non-empty"));
        }
        let mut values = Array2::zeros((rows, cols));
        for r in 0..rows {
            let (vline, text) = lines.expect("a tensor row")?;
            let mut row = values.row_mut(r);
            let mut count = 0usize;
            for (c, tok) in text.split_whitespace().enumerate() {
                if c >= cols {
                    return Err(bad(vline, format!("more than {cols} values in tensor row")));
                }
                row[c] = tok
                    .parse::<f64>()
                    .map_err(|_| bad(vline, format!("bad float '{tok}'")))?;
                count += 1;
            }
            if count != cols {
                return Err(bad(vline, format!("expected {cols} values, found {count}")));
            }
        }
        tensors.push_back(LoadedTensor { name, line, values });
    }
    if let Some((line, text)) = lines.next()? {
        if !text.trim().is_empty() {
            return Err(bad(line, "content after 'end'"));
        }
    }

    assemble(meta, tensors)
}

fn take(
    tensors: &mut VecDeque<LoadedTensor>,
    name: &'static str,
    rows: usize,
    cols: usize,
) -> Result<Array2<f64>> {
    let t = tensors.pop_front().ok_or_else(|| {
        bad(0, format!("missing tensor '{name}'"))
    })?;
    if t.name != name {
        return Err(bad(t.line, format!("expected tensor '{name}', found '{}'", t.name)));
    }
    if t.values.dim() != (rows, cols) {
        return Err(bad(
            t.line,
            format!(
                "tensor '{name}' should be {rows}x{cols}, found {}x{}",
                t.values.nrows(),
                t.values.ncols()
            ),
        ));
    }
    Ok(t.values)
}

fn to_r<R: Real>(values: Array2<f64>) -> Array2<R> {
    values.mapv(R::from_f64)
}

fn assemble<R: Real>(meta: Meta, mut tensors: VecDeque<LoadedTensor>) -> Result<Checkpoint<R>> {
    let adhoc = meta.condition == Condition::Adhoc;
    let finish = |tensors: &VecDeque<LoadedTensor>, ckpt: Checkpoint<R>| -> Result<Checkpoint<R>> {
        if let Some(extra) = tensors.front() {
            return Err(bad(extra.line, format!("unexpected extra tensor '{}'", extra.name)));
        }
        Ok(ckpt)
    };

    if meta.arch == ModelArch::Svm {
        if meta.d == 0 {
            return Err(Error::Config("svm checkpoint has dimension 0".into()));
        }
        let w = take(&mut tensors, "w", 1, meta.d)?;
        let b = take(&mut tensors, "b", 1, 1)?;
        let tfidf = if adhoc {
            let terms = meta
                .vocab
                .ok_or_else(|| Error::Config("ad-hoc svm checkpoint is missing its terms".into()))?;
            let docs = meta
                .tfidf_docs
                .ok_or_else(|| Error::Config("ad-hoc svm checkpoint is missing tfidf_docs".into()))?;
            let idf = take(&mut tensors, "idf", 1, meta.d)?;
            Some(TfidfModel::from_parts(terms, idf.row(0).to_vec(), docs)?)
        } else {
            if meta.vocab.is_some() || meta.tfidf_docs.is_some() {
                return Err(Error::Config(
                    "pretrained svm checkpoint carries ad-hoc metadata".into(),
                ));
            }
            None
        };
        let model = SvmModel::from_parts(
            Array1::from_iter(w.row(0).iter().map(|&v| R::from_f64(v))),
            R::from_f64(b[[0, 0]]),
        );
        return finish(&tensors, Checkpoint {
            model: NetworkModel::Svm(model),
            condition: meta.condition,
            vocab: None,
            tfidf,
        });
    }

    // networks
    if meta.maxlen == 0 || meta.d == 0 || meta.width == 0 {
        return Err(Error::Config("network checkpoint has a zero dimension".into()));
    }
    let vocab = match (&meta.vocab, adhoc) {
        (Some(units), true) => Some(AdhocVocab::from_ordered(units.clone())?),
        (None, false) => None,
        (Some(_), false) => {
            return Err(Error::Config("pretrained checkpoint carries a unit table".into()))
        }
        (None, true) => {
            return Err(Error::Config("ad-hoc checkpoint is missing its unit table".into()))
        }
    };
    let table_len = vocab.as_ref().map(|v| v.table_len());

    let mut params = Params::new();
    let (maxlen, d, width) = (meta.maxlen, meta.d, meta.width);
    let model = match meta.arch {
        ModelArch::Mlp => {
            for (name, r, c) in [
                ("w1", maxlen * d, width),
                ("b1", 1, width),
                ("w2", width, 1),
                ("b2", 1, 1),
            ] {
                params.add(name, to_r(take(&mut tensors, name, r, c)?));
            }
            if let Some(t) = table_len {
                params.add("embed", to_r(take(&mut tensors, "embed", t, d)?));
            }
            NetworkModel::Mlp(MlpNet::from_parts(params, maxlen, d, width, meta.dropout, adhoc))
        }
        ModelArch::Cnn => {
            let dims = cnn::cnn_dims(maxlen, d, width)?;
            for (name, r, c) in [
                ("kernel", width, 16),
                ("bc", 1, width),
                ("wo", dims.flat, 1),
                ("bo", 1, 1),
            ] {
                params.add(name, to_r(take(&mut tensors, name, r, c)?));
            }
            if let Some(t) = table_len {
                params.add("embed", to_r(take(&mut tensors, "embed", t, d)?));
            }
            NetworkModel::Cnn(CnnNet::from_parts(params, maxlen, d, width, meta.dropout, adhoc))
        }
        ModelArch::Lstm => {
            for (name, r, c) in [
                ("wi", d, width),
                ("wf", d, width),
                ("wo", d, width),
                ("wg", d, width),
                ("ui", width, width),
                ("uf", width, width),
                ("uo", width, width),
                ("ug", width, width),
                ("bi", 1, width),
                ("bf", 1, width),
                ("bo", 1, width),
                ("bg", 1, width),
                ("out_w", width, 1),
                ("out_b", 1, 1),
            ] {
                params.add(name, to_r(take(&mut tensors, name, r, c)?));
            }
            if let Some(t) = table_len {
                params.add("embed", to_r(take(&mut tensors, "embed", t, d)?));
            }
            NetworkModel::Lstm(LstmNet::from_parts(params, maxlen, d, width, meta.dropout, adhoc))
        }
        ModelArch::Svm => unreachable!("handled above"),
    };
    if adhoc {
        let table = match &model {
            NetworkModel::Mlp(m) => &m.params.values[crate::models::mlp::EMB],
            NetworkModel::Cnn(m) => &m.params.values[cnn::EMB],
            NetworkModel::Lstm(m) => &m.params.values[crate::models::lstm::EMB],
            NetworkModel::Svm(_) => unreachable!(),
        };
        if table.row(0).iter().any(|&v| v != R::zero()) {
            return Err(Error::Config(
                "embedding table padding row must stay zero".into(),
            ));
        }
    }
    finish(&tensors, Checkpoint { model, condition: meta.condition, vocab, tfidf: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::input::{FeatureVector, ModelInput};
    use crate::models::{predict, train_svm, ClassWeights, SvmConfig};
    use crate::corpus::Label;

    fn save_to_string<R: Real>(ckpt: &Checkpoint<R>) -> String {
        let mut buf = Vec::new();
        save_checkpoint(ckpt, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn reload<R: Real>(text: &str) -> Result<Checkpoint<R>> {
        load_checkpoint(text.as_bytes())
    }

    #[test]
    fn pretrained_mlp_round_trips_exactly() {
        let net = MlpNet::<f64>::new_pretrained(3, 4, 2, 0.25, 17).unwrap();
        let ckpt = Checkpoint {
            model: NetworkModel::Mlp(net),
            condition: Condition::Pretrained,
            vocab: None,
            tfidf: None,
        };
        let text = save_to_string(&ckpt);
        let back: Checkpoint<f64> = reload(&text).unwrap();
        assert_eq!(back, ckpt);
        // saving the reload is byte-identical (fixed point)
        assert_eq!(save_to_string(&back), text);
    }

    #[test]
    fn adhoc_cnn_round_trip_preserves_unit_order() {
        let vocab = AdhocVocab::from_ordered(vec!["zeta".into(), "alpha".into()]).unwrap();
        let net = CnnNet::<f64>::new_adhoc(5, vocab.table_len(), 6, 2, 0.0, 3).unwrap();
        let ckpt = Checkpoint {
            model: NetworkModel::Cnn(net),
            condition: Condition::Adhoc,
            vocab: Some(vocab),
            tfidf: None,
        };
        let back: Checkpoint<f64> = reload(&save_to_string(&ckpt)).unwrap();
        assert_eq!(back, ckpt);
        let v = back.vocab.unwrap();
        assert_eq!(v.index_of("zeta"), Some(1));
        assert_eq!(v.index_of("alpha"), Some(2));
    }

    #[test]
    fn lstm_round_trip_and_equal_predictions() {
        let net = LstmNet::<f64>::new_pretrained(4, 3, 2, 0.1, 29).unwrap();
        let ckpt = Checkpoint {
            model: NetworkModel::Lstm(net),
            condition: Condition::Pretrained,
            vocab: None,
            tfidf: None,
        };
        let back: Checkpoint<f64> = reload(&save_to_string(&ckpt)).unwrap();
        let x = ndarray::Array2::from_shape_fn((4, 3), |(i, j)| (i * 3 + j) as f64 * 0.1 - 0.5);
        let input = ModelInput::Matrix { x, len: 4 };
        assert_eq!(
            predict(&ckpt.model, &input).unwrap(),
            predict(&back.model, &input).unwrap()
        );
    }

    #[test]
    fn adhoc_svm_round_trips_with_tfidf() {
        let docs: Vec<Vec<String>> = vec![
            vec!["bad".into(), "noise".into()],
            vec!["good".into(), "noise".into()],
            vec!["bad".into(), "bad".into()],
            vec!["good".into()],
        ];
        let tfidf = TfidfModel::fit(&docs).unwrap();
        let xs: Vec<FeatureVector<f64>> = docs.iter().map(|d| tfidf.transform(d)).collect();
        let ys = [Label::Harmful, Label::Clean, Label::Harmful, Label::Clean];
        let model = train_svm(
            &xs,
            &ys,
            &ClassWeights::balanced(),
            &SvmConfig::default(),
            11,
        )
        .unwrap();
        let ckpt = Checkpoint {
            model: NetworkModel::Svm(model),
            condition: Condition::Adhoc,
            vocab: None,
            tfidf: Some(tfidf),
        };
        let back: Checkpoint<f64> = reload(&save_to_string(&ckpt)).unwrap();
        assert_eq!(back, ckpt);
        let probe: Vec<String> = vec!["bad".into(), "unknown".into()];
        let tf = back.tfidf.as_ref().unwrap();
        let input = ModelInput::Vector(tf.transform::<f64>(&probe));
        let (label, _) = predict(&back.model, &input).unwrap();
        assert_eq!(label, Label::Harmful);
    }

    #[test]
    fn malformed_checkpoints_are_rejected_with_line_numbers() {
        let net = MlpNet::<f64>::new_pretrained(2, 3, 2, 0.0, 1).unwrap();
        let ckpt = Checkpoint {
            model: NetworkModel::Mlp(net),
            condition: Condition::Pretrained,
            vocab: None,
            tfidf: None,
        };
        let good = save_to_string(&ckpt);

        let bad_header = good.replacen("lingemb checkpoint 1", "lingemb checkpoint 9", 1);
        match reload::<f64>(&bad_header).unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error: {other}"),
        }

        let truncated = good.trim_end_matches("end\n");
        assert!(matches!(
            reload::<f64>(truncated).unwrap_err(),
            Error::Format { .. }
        ));

        let trailing = format!("{good}tensor late 1 1\n0.0\nend\n");
        assert!(matches!(
            reload::<f64>(&trailing).unwrap_err(),
            Error::Format { .. }
        ));

        let garbled = good.replacen("tensor w1 6 2", "tensor w1 6 3", 1);
        assert!(matches!(
            reload::<f64>(&garbled).unwrap_err(),
            Error::Format { .. }
        ));
    }

    #[test]
    fn nonzero_padding_row_is_rejected() {
        let vocab = AdhocVocab::from_ordered(vec!["a".into()]).unwrap();
        let mut net = MlpNet::<f64>::new_adhoc(2, vocab.table_len(), 3, 2, 0.0, 5).unwrap();
        net.params.values[crate::models::mlp::EMB][[0, 1]] = 0.5;
        let ckpt = Checkpoint {
            model: NetworkModel::Mlp(net),
            condition: Condition::Adhoc,
            vocab: Some(vocab),
            tfidf: None,
        };
        let text = save_to_string(&ckpt);
        assert!(matches!(
            reload::<f64>(&text).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn condition_and_state_must_agree_at_save_time() {
        let net = MlpNet::<f64>::new_pretrained(2, 3, 2, 0.0, 1).unwrap();
        let ckpt = Checkpoint {
            model: NetworkModel::Mlp(net),
            condition: Condition::Adhoc,
            vocab: None,
            tfidf: None,
        };
        let mut buf = Vec::new();
        assert!(matches!(
            save_checkpoint(&ckpt, &mut buf).unwrap_err(),
            Error::Config(_)
        ));
    }
}
