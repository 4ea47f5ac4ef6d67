//! Labeled harmful/clean dataset ingestion.
//!
//! Expects a UTF-8 CSV with header exactly `id,text,label` (label 1 =
//! harmful), plus an optional companion CoNLL-U stream whose
//! `# doc_id = <id>` comments key sentences to documents.

use std::collections::HashMap;
use std::io::{BufRead, Read};

use crate::corpus::conllu::parse_conllu_keyed;
use crate::corpus::types::{Label, LabeledCorpus, LabeledDocument};
use crate::error::{Error, Result};

pub fn parse_labeled_dataset<R: Read, B: BufRead>(
    csv_stream: R,
    conllu_stream: Option<B>,
) -> Result<LabeledCorpus> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_stream);
    {
        let headers = reader.headers()?;
        let expected = ["id", "text", "label"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Value(format!(
                "dataset header must be exactly id,text,label (found {:?})",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }

    let mut documents = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".into());
        if record.len() != 3 {
            return Err(Error::Value(format!("row {row}: expected 3 fields, found {}", record.len())));
        }
        let id = record[0].to_string();
        let text = record[1].to_string();
        let label = match record[2].trim() {
            "0" => Label::Clean,
            "1" => Label::Harmful,
            other => {
                return Err(Error::Value(format!(
                    "row {row} (id {id:?}): label must be 0 or 1, found {other:?}"
                )))
            }
        };
        if index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        index.insert(id.clone(), documents.len());
        documents.push(LabeledDocument {
            id,
            text,
            sentences: Vec::new(),
            label,
        });
    }

    if let Some(stream) = conllu_stream {
        for (doc_id, sentence) in parse_conllu_keyed(stream)? {
            let doc_id = doc_id.ok_or_else(|| {
                Error::DanglingAnnotation("sentence without a # doc_id comment in companion file".into())
            })?;
            let slot = index
                .get(&doc_id)
                .ok_or_else(|| Error::DanglingAnnotation(format!("doc_id {doc_id:?} has no CSV row")))?;
            documents[*slot].sentences.push(sentence);
        }
    }

    Ok(LabeledCorpus { documents })
}
