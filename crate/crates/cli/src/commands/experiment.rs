//! `experiment`: the full scheme x model x condition matrix under
//! stratified cross-validation. Cell failures (for example, missing
//! pretrained embeddings for one scheme) are recorded in the report while
//! the rest of the matrix completes; the exit code is 3 when any cell
//! failed and 0 only when none did.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;

use lingemb::embedding::EmbeddingModel;
use lingemb::eval::{render_tsv, run_matrix, CellOutcome, MatrixPlan, MatrixReport};
use lingemb::features::FeatureScheme;
use lingemb::models::Condition;
use lingemb::Scalar;

use crate::commands::{load_dataset, write_file};
use crate::config::{runtime, validation, CliError, Resolved};

pub fn run(r: &Resolved) -> Result<u8, CliError> {
    let dataset_path = r.require_dataset()?;
    let dataset = load_dataset(dataset_path, r.cfg.annotations.as_deref())?;

    let mut embeddings: HashMap<FeatureScheme, EmbeddingModel<Scalar>> = HashMap::new();
    if r.conditions.contains(&Condition::Pretrained) {
        for &scheme in &r.schemes {
            match r.embedding_source(scheme) {
                Some(path) => {
                    let reader = File::open(&path)
                        .map(BufReader::new)
                        .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
                    let model = EmbeddingModel::load(reader)
                        .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
                    log::info!("loaded {scheme} embeddings from {}", path.display());
                    embeddings.insert(scheme, model.with_scheme(Some(scheme)));
                }
                None => log::warn!(
                    "no embeddings available for scheme {scheme}; \
                     its pretrained cells will fail"
                ),
            }
        }
    }

    let plan = MatrixPlan {
        corpus: &dataset,
        schemes: &r.schemes,
        models: &r.models,
        conditions: &r.conditions,
        embeddings: &embeddings,
        classifier: &r.cfg.classifier,
        eval: r.eval,
        workers: r.workers,
    };
    // run_matrix validates the whole plan before fitting anything; cell
    // errors never bubble up as Err, so an Err here is a config problem.
    let report = run_matrix(&plan).map_err(validation)?;

    let tsv = render_tsv(&report);
    let mut json = serde_json::to_vec_pretty(&report).map_err(runtime)?;
    json.push(b'\n');
    let mut manifest = serde_json::to_vec_pretty(&r.cfg).map_err(runtime)?;
    manifest.push(b'\n');

    let tsv_path = r.cfg.out_dir.join("report.tsv");
    let json_path = r.cfg.out_dir.join("report.json");
    write_file(&tsv_path, tsv.as_bytes())?;
    write_file(&json_path, &json)?;
    write_file(&r.cfg.out_dir.join("config.json"), &manifest)?;
    log::info!("wrote {} and {}", tsv_path.display(), json_path.display());

    print!("{tsv}");
    let failed = failures(&report);
    if failed.is_empty() {
        Ok(0)
    } else {
        for (cell, error) in &failed {
            eprintln!("failed cell {cell}: {error}");
        }
        eprintln!("{} of the matrix cells failed; see {}", failed.len(), json_path.display());
        Ok(3)
    }
}

fn failures(report: &MatrixReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for section in &report.sections {
        for (m, row) in section.cells.iter().enumerate() {
            for (s, cell) in row.iter().enumerate() {
                if let CellOutcome::Failed { error } = cell {
                    let name = format!(
                        "{}/{}/{}",
                        section.condition, section.schemes[s], section.models[m]
                    );
                    out.push((name, error.clone()));
                }
            }
        }
    }
    out
}
