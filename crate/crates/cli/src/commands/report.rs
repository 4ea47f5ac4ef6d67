//! `report`: re-render the TSV table from an earlier experiment's
//! `report.json` without re-running anything.

use std::fs::File;
use std::io::BufReader;

use lingemb::eval::{render_tsv, MatrixReport};

use crate::config::{runtime, validation, CliError, Resolved};

pub fn run(r: &Resolved) -> Result<u8, CliError> {
    let path = r.cfg.out_dir.join("report.json");
    if !path.exists() {
        return Err(validation(format!(
            "no report at {}; run `lingemb experiment` first",
            path.display()
        )));
    }
    let reader = File::open(&path)
        .map(BufReader::new)
        .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    let report: MatrixReport = serde_json::from_reader(reader)
        .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    print!("{}", render_tsv(&report));
    Ok(0)
}
