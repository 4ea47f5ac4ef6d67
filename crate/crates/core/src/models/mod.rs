//! Classifiers over encoded documents: a linear SVM plus three neural
//! architectures (MLP, CNN, LSTM), each usable with frozen pretrained
//! embeddings or a trainable ad-hoc table.

pub mod adam;
pub mod checkpoint;
pub mod cnn;
pub mod diag;
pub mod fit;
pub mod input;
pub mod lstm;
pub mod mlp;
pub(crate) mod net;
pub mod svm;
pub mod tfidf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::real::{sigmoid, Real};

pub use adam::AdamParams;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use cnn::CnnNet;
pub use fit::fit_classifier;
pub use input::{
    doc_index_sequence, doc_mean_vector, doc_padded_matrix, AdhocVocab, FeatureVector, ModelInput,
};
pub use lstm::LstmNet;
pub use mlp::MlpNet;
pub use svm::{svm_objective_gradient, train_svm, SvmConfig, SvmModel};
pub use tfidf::TfidfModel;

use net::{train_network, LoopConfig};

/// The four classifier architectures in the comparison matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelArch {
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "MLP")]
    Mlp,
    #[serde(rename = "CNN")]
    Cnn,
    #[serde(rename = "LSTM")]
    Lstm,
}

impl ModelArch {
    pub const ALL: [ModelArch; 4] = [ModelArch::Svm, ModelArch::Mlp, ModelArch::Cnn, ModelArch::Lstm];

    pub fn name(self) -> &'static str {
        match self {
            ModelArch::Svm => "SVM",
            ModelArch::Mlp => "MLP",
            ModelArch::Cnn => "CNN",
            ModelArch::Lstm => "LSTM",
        }
    }

    pub fn is_network(self) -> bool {
        self != ModelArch::Svm
    }
}

impl fmt::Display for ModelArch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelArch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Param(format!("unknown model '{s}' (expected SVM, MLP, CNN or LSTM)")))
    }
}

/// Where document features come from: frozen pretrained embeddings, or
/// representations learned inside the classifier itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Pretrained,
    Adhoc,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Pretrained, Condition::Adhoc];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Pretrained => "pretrained",
            Condition::Adhoc => "adhoc",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Param(format!("unknown condition '{s}' (expected pretrained or adhoc)")))
    }
}

/// Per-class loss weights balancing the skewed label distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub clean: f64,
    pub harmful: f64,
}

impl ClassWeights {
    pub fn balanced() -> Self {
        Self { clean: 1.0, harmful: 1.0 }
    }

    pub fn weight(&self, label: Label) -> f64 {
        match label {
            Label::Clean => self.clean,
            Label::Harmful => self.harmful,
        }
    }
}

/// Hyperparameters shared by every classifier cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierConfig {
    /// documents are truncated or padded to this many units
    pub maxlen: usize,
    /// MLP hidden width
    pub hidden: usize,
    /// CNN filter count
    pub filters: usize,
    /// LSTM state width
    pub lstm_hidden: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// embedding dimension of trainable ad-hoc tables
    pub adhoc_d: usize,
    pub adam: AdamParams,
    pub svm: SvmConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            maxlen: 64,
            hidden: 128,
            filters: 32,
            lstm_hidden: 64,
            dropout: 0.5,
            batch_size: 32,
            epochs: 10,
            adhoc_d: 50,
            adam: AdamParams::default(),
            svm: SvmConfig::default(),
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.maxlen == 0 {
            return Err(Error::Param("maxlen must be >= 1".into()));
        }
        if self.hidden == 0 || self.filters == 0 || self.lstm_hidden == 0 {
            return Err(Error::Param("network widths must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Param("dropout must be in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Param("batch_size and epochs must be >= 1".into()));
        }
        if self.adhoc_d == 0 {
            return Err(Error::Param("adhoc_d must be >= 1".into()));
        }
        self.adam.validate()?;
        self.svm.validate()
    }
}

/// A trained classifier of any architecture.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkModel<R: Real> {
    Svm(SvmModel<R>),
    Mlp(MlpNet<R>),
    Cnn(CnnNet<R>),
    Lstm(LstmNet<R>),
}

impl<R: Real> NetworkModel<R> {
    pub fn arch(&self) -> ModelArch {
        match self {
            NetworkModel::Svm(_) => ModelArch::Svm,
            NetworkModel::Mlp(_) => ModelArch::Mlp,
            NetworkModel::Cnn(_) => ModelArch::Cnn,
            NetworkModel::Lstm(_) => ModelArch::Lstm,
        }
    }

    pub fn is_adhoc(&self) -> bool {
        match self {
            NetworkModel::Svm(_) => false,
            NetworkModel::Mlp(m) => m.adhoc,
            NetworkModel::Cnn(m) => m.adhoc,
            NetworkModel::Lstm(m) => m.adhoc,
        }
    }

    /// Document cap (in units) the network was built for; `None` for the SVM.
    pub fn maxlen(&self) -> Option<usize> {
        match self {
            NetworkModel::Svm(_) => None,
            NetworkModel::Mlp(m) => Some(m.maxlen),
            NetworkModel::Cnn(m) => Some(m.maxlen),
            NetworkModel::Lstm(m) => Some(m.maxlen),
        }
    }
}

/// Classify one encoded document. The score is always the harmful-class
/// probability; the label is harmful when the score reaches 0.5 (for the
/// SVM that is a non-negative margin).
pub fn predict<R: Real>(model: &NetworkModel<R>, input: &ModelInput<R>) -> Result<(Label, f64)> {
    let z = match model {
        NetworkModel::Svm(m) => match input {
            ModelInput::Vector(x) => m.margin(x)?,
            other => return Err(input::wrong_input("vector", other)),
        },
        NetworkModel::Mlp(m) => net::NetCore::logit(m, input)?,
        NetworkModel::Cnn(m) => net::NetCore::logit(m, input)?,
        NetworkModel::Lstm(m) => net::NetCore::logit(m, input)?,
    };
    let score = sigmoid(z.to_f64());
    let label = if score >= 0.5 { Label::Harmful } else { Label::Clean };
    Ok((label, score))
}

/// Build and train one neural classifier. `table_len` switches on the
/// ad-hoc condition: `Some(n)` trains an `n`-row embedding table (row 0 is
/// the frozen padding row), `None` consumes pretrained document matrices.
/// Returns the model and the mean loss per epoch.
pub fn train_network_model<R: Real>(
    arch: ModelArch,
    d: usize,
    table_len: Option<usize>,
    cfg: &ClassifierConfig,
    inputs: &[ModelInput<R>],
    labels: &[Label],
    weights: &ClassWeights,
    seed: u64,
) -> Result<(NetworkModel<R>, Vec<f64>)> {
    cfg.validate()?;
    if d == 0 {
        return Err(Error::Param("embedding dimension must be >= 1".into()));
    }
    let lc = LoopConfig {
        batch_size: cfg.batch_size,
        epochs: cfg.epochs,
        adam: cfg.adam,
    };
    match arch {
        ModelArch::Svm => Err(Error::Param(
            "the SVM is trained by train_svm, not the network loop".into(),
        )),
        ModelArch::Mlp => {
            let mut net = match table_len {
                None => MlpNet::new_pretrained(cfg.maxlen, d, cfg.hidden, cfg.dropout, seed)?,
                Some(t) => MlpNet::new_adhoc(cfg.maxlen, t, d, cfg.hidden, cfg.dropout, seed)?,
            };
            let losses = train_network(&mut net, inputs, labels, weights, lc, seed)?;
            Ok((NetworkModel::Mlp(net), losses))
        }
        ModelArch::Cnn => {
            let mut net = match table_len {
                None => CnnNet::new_pretrained(cfg.maxlen, d, cfg.filters, cfg.dropout, seed)?,
                Some(t) => CnnNet::new_adhoc(cfg.maxlen, t, d, cfg.filters, cfg.dropout, seed)?,
            };
            let losses = train_network(&mut net, inputs, labels, weights, lc, seed)?;
            Ok((NetworkModel::Cnn(net), losses))
        }
        ModelArch::Lstm => {
            let mut net = match table_len {
                None => LstmNet::new_pretrained(cfg.maxlen, d, cfg.lstm_hidden, cfg.dropout, seed)?,
                Some(t) => LstmNet::new_adhoc(cfg.maxlen, t, d, cfg.lstm_hidden, cfg.dropout, seed)?,
            };
            let losses = train_network(&mut net, inputs, labels, weights, lc, seed)?;
            Ok((NetworkModel::Lstm(net), losses))
        }
    }
}
