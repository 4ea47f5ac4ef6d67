//! `train-embeddings`: skip-gram models from the encoded files that
//! `encode` wrote, one `emb-<SCHEME>.vec` per requested scheme. Unit
//! schemes train over sliding windows; DEPC trains over the extracted
//! dependency pairs. Per-epoch (epoch, mean loss, lr) lines stream to
//! standard error while training runs.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use lingemb::corpus::read_units;
use lingemb::embedding::{train_embeddings_observed, PairCorpus};
use lingemb::features::{read_pairs, FeatureScheme};
use lingemb::Scalar;

use crate::commands::{pairs_path, units_path, write_file};
use crate::config::{runtime, validation, CliError, Resolved};

pub fn run(r: &Resolved) -> Result<u8, CliError> {
    let mut jobs: Vec<(FeatureScheme, PathBuf)> = Vec::with_capacity(r.schemes.len());
    for &scheme in &r.schemes {
        let input = if scheme.is_unit_scheme() {
            units_path(&r.cfg.out_dir, scheme)
        } else {
            pairs_path(&r.cfg.out_dir)
        };
        if !input.exists() {
            return Err(validation(format!(
                "missing encoded input {} for scheme {scheme}; run `lingemb encode` first",
                input.display()
            )));
        }
        jobs.push((scheme, input));
    }

    for (scheme, input) in jobs {
        let reader = File::open(&input)
            .map(BufReader::new)
            .map_err(|e| runtime(format!("{}: {e}", input.display())))?;
        let corpus = if scheme.is_unit_scheme() {
            PairCorpus::window(read_units(reader).map_err(runtime)?)
        } else {
            PairCorpus::pairs(read_pairs(reader).map_err(runtime)?)
        };
        let epochs = r.cfg.train.epochs;
        let (model, _) =
            train_embeddings_observed::<Scalar, _>(&corpus, &r.cfg.train, Some(scheme), |log| {
                eprintln!(
                    "[{scheme}] epoch {}/{epochs} mean_loss {:.6} lr {:.6}",
                    log.epoch + 1,
                    log.mean_loss,
                    log.lr
                );
            })
            .map_err(|e| runtime(format!("training {scheme} embeddings: {e}")))?;

        let out = r.cfg.out_dir.join(format!("emb-{scheme}.vec"));
        let mut buf = Vec::new();
        model.save(&mut buf).map_err(runtime)?;
        write_file(&out, &buf)?;
        println!("wrote {} ({} units, d={})", out.display(), model.len(), model.dim());
    }
    Ok(0)
}
