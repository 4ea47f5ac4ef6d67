use thiserror::Error;

/// Errors surfaced by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input line (CoNLL-U, unit/pair files).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Sentence violating the single-root / acyclicity invariants.
    #[error("structural error in sentence {sentence}: {message}")]
    Structure { sentence: String, message: String },

    /// Bad value in a labeled dataset (label outside {0,1}, bad header).
    #[error("{0}")]
    Value(String),

    /// Annotation present in a companion file with no matching document.
    #[error("dangling annotation: {0}")]
    DanglingAnnotation(String),

    /// Duplicate document id in a labeled dataset.
    #[error("duplicate document id: {0}")]
    DuplicateId(String),

    /// Operation needs dependency annotation the document does not have.
    #[error("annotation required: {0}")]
    AnnotationRequired(String),

    /// Scheme used where it does not apply (DEPC has no unit stream).
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    /// Out-of-range or inconsistent parameter.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Vocabulary construction retained no units.
    #[error("empty vocabulary: {0}")]
    EmptyVocab(String),

    /// Pair stream produced no training pairs.
    #[error("empty pair stream: {0}")]
    EmptyStream(String),

    /// Unit not present in a vocabulary.
    #[error("unknown unit: {0}")]
    UnknownUnit(String),

    /// Non-finite loss, gradient, or parameter update.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Training data unusable (e.g. a single class).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Input dimensions do not match the model.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Serialized embeddings or checkpoints do not match their header.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// Invalid experiment configuration (scheme/embedding mismatch, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Failure inside one experiment cell, with the cell identity attached.
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach an experiment-cell identity to an error bubbling out of it.
    pub fn in_cell(self, cell: impl Into<String>) -> Self {
        Error::Cell {
            cell: cell.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
