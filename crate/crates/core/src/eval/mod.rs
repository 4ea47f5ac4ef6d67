//! Cross-validated evaluation: stratified folds, F-scores, single cells,
//! and the full scheme x model comparison matrix.

pub mod cell;
pub mod folds;
pub mod matrix;
pub mod metrics;

pub use cell::{run_cell, stream_scheme, CellReport, CellSpec, EvalConfig};
pub use folds::{derive_class_weights, stratified_folds, FoldAssignment};
pub use matrix::{
    render_tsv, run_matrix, CellOutcome, ConditionSection, MatrixPlan, MatrixReport,
};
pub use metrics::{f_score, MetricsReport};
