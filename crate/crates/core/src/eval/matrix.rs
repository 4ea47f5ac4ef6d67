//! The full scheme x model comparison matrix, one section per condition.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledCorpus;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::features::FeatureScheme;
use crate::models::{ClassifierConfig, Condition, ModelArch};
use crate::real::Real;

use super::cell::{run_cell, CellReport, CellSpec, EvalConfig};

/// Everything one matrix run needs. `embeddings` maps each scheme that
/// appears in a pretrained section to its trained embedding model.
pub struct MatrixPlan<'a, R: Real> {
    pub corpus: &'a LabeledCorpus,
    pub schemes: &'a [FeatureScheme],
    pub models: &'a [ModelArch],
    pub conditions: &'a [Condition],
    pub embeddings: &'a HashMap<FeatureScheme, EmbeddingModel<R>>,
    pub classifier: &'a ClassifierConfig,
    pub eval: EvalConfig,
    pub workers: usize,
}

/// One cell's result. A failed cell carries its error text so the rest of
/// the matrix still reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CellOutcome {
    Ok { report: CellReport },
    Failed { error: String },
}

impl CellOutcome {
    pub fn report(&self) -> Option<&CellReport> {
        match self {
            CellOutcome::Ok { report } => Some(report),
            CellOutcome::Failed { .. } => None,
        }
    }
}

/// One condition's scheme x model grid; `cells[m][s]` pairs `models[m]`
/// with `schemes[s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSection {
    pub condition: Condition,
    pub schemes: Vec<FeatureScheme>,
    pub models: Vec<ModelArch>,
    pub cells: Vec<Vec<CellOutcome>>,
}

/// Full matrix report, serializable to JSON as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub folds: usize,
    pub seed: u64,
    pub sections: Vec<ConditionSection>,
}

impl MatrixReport {
    pub fn failed_cells(&self) -> usize {
        self.sections
            .iter()
            .flat_map(|s| s.cells.iter().flatten())
            .filter(|c| c.report().is_none())
            .count()
    }

    pub fn has_failures(&self) -> bool {
        self.failed_cells() > 0
    }
}

fn unique<T: PartialEq + Copy + std::fmt::Debug>(kind: &str, xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Param(format!("no {kind} requested")));
    }
    for (i, a) in xs.iter().enumerate() {
        if xs[..i].contains(a) {
            return Err(Error::Param(format!("{kind} list repeats {a:?}")));
        }
    }
    Ok(())
}

/// Schemes a condition can actually run: the ad-hoc condition has nothing
/// to re-learn for DEPC, so that column is dropped from its section.
fn section_schemes(condition: Condition, schemes: &[FeatureScheme]) -> Vec<FeatureScheme> {
    schemes
        .iter()
        .copied()
        .filter(|&s| condition == Condition::Pretrained || s != FeatureScheme::DepC)
        .collect()
}

/// Run every cell of the plan. Cell failures are recorded in the report;
/// only plan-level misconfiguration (empty lists, duplicate entries,
/// missing embedding models) fails the whole run.
pub fn run_matrix<R: Real>(plan: &MatrixPlan<'_, R>) -> Result<MatrixReport> {
    unique("schemes", plan.schemes)?;
    unique("models", plan.models)?;
    unique("conditions", plan.conditions)?;
    plan.eval.validate()?;
    plan.classifier.validate()?;

    // a pretrained cell without its embedding model fails on its own when
    // run_cell rejects the missing model; the rest of the matrix completes

    // lay out sections first, then flatten the cells into a job list
    struct Job {
        section: usize,
        row: usize,
        col: usize,
        spec: CellSpec,
    }
    let mut sections = Vec::new();
    let mut jobs = Vec::new();
    for &condition in plan.conditions {
        let schemes = section_schemes(condition, plan.schemes);
        if schemes.is_empty() {
            return Err(Error::Config(format!(
                "condition {condition} has no runnable schemes in this plan"
            )));
        }
        let section = sections.len();
        for (row, &model) in plan.models.iter().enumerate() {
            for (col, &scheme) in schemes.iter().enumerate() {
                jobs.push(Job {
                    section,
                    row,
                    col,
                    spec: CellSpec { scheme, model, condition },
                });
            }
        }
        sections.push(ConditionSection {
            condition,
            schemes,
            models: plan.models.to_vec(),
            cells: Vec::new(),
        });
    }

    let run_one = |spec: CellSpec| -> CellOutcome {
        let embeddings = match spec.condition {
            Condition::Pretrained => plan.embeddings.get(&spec.scheme),
            Condition::Adhoc => None,
        };
        log::info!("evaluating cell {spec}");
        match run_cell(plan.corpus, spec, embeddings, plan.classifier, &plan.eval) {
            Ok(report) => CellOutcome::Ok { report },
            Err(e) => {
                log::warn!("cell {spec} failed: {e}");
                CellOutcome::Failed { error: e.to_string() }
            }
        }
    };

    let mut outcomes: Vec<Option<CellOutcome>> = (0..jobs.len()).map(|_| None).collect();
    let workers = plan.workers.clamp(1, jobs.len().max(1));
    if workers == 1 {
        for (slot, job) in outcomes.iter_mut().zip(&jobs) {
            *slot = Some(run_one(job.spec));
        }
    } else {
        let next = AtomicUsize::new(0);
        let shared = Mutex::new(&mut outcomes);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= jobs.len() {
                        break;
                    }
                    let outcome = run_one(jobs[i].spec);
                    shared.lock().unwrap()[i] = Some(outcome);
                });
            }
        });
    }

    for section in &mut sections {
        let rows = section.models.len();
        let cols = section.schemes.len();
        section.cells = vec![vec![CellOutcome::Failed { error: "unreached".into() }; cols]; rows];
    }
    for (job, outcome) in jobs.iter().zip(outcomes) {
        sections[job.section].cells[job.row][job.col] =
            outcome.expect("every job ran exactly once");
    }

    Ok(MatrixReport {
        folds: plan.eval.folds,
        seed: plan.eval.seed,
        sections,
    })
}

/// Tab-separated rendering: per condition a header row of scheme names and
/// one row per model, mean F1 to three decimals, `FAILED` where a cell
/// errored. Comment lines carry the run parameters.
pub fn render_tsv(report: &MatrixReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# folds\t{}", report.folds);
    let _ = writeln!(out, "# seed\t{}", report.seed);
    let _ = writeln!(out, "# metric\tmean F1 of the harmful class over folds");
    for section in &report.sections {
        out.push('\n');
        let _ = writeln!(out, "# condition\t{}", section.condition);
        out.push_str("model");
        for s in &section.schemes {
            let _ = write!(out, "\t{s}");
        }
        out.push('\n');
        for (model, row) in section.models.iter().zip(&section.cells) {
            out.push_str(model.name());
            for cell in row {
                match cell.report() {
                    Some(r) => {
                        let _ = write!(out, "\t{:.3}", r.mean_f1);
                    }
                    None => out.push_str("\tFAILED"),
                }
            }
            out.push('\n');
        }
    }
    out
}
