//! CoNLL-U reader and writer.
//!
//! Ten tab-separated columns per token line (ID FORM LEMMA UPOS XPOS FEATS
//! HEAD DEPREL DEPS MISC), blank line between sentences, `#` comments
//! ignored except for `# doc_id = ...`, which keys sentences to labeled
//! documents. Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are
//! skipped: the pipeline operates on the basic tree only.

use std::io::BufRead;

use crate::corpus::types::{AnnotatedSentence, Token};
use crate::error::{Error, Result};

const COLUMNS: usize = 10;

/// Internal space sanitation: forms with internal whitespace would corrupt
/// the space-separated unit files, so they are replaced at ingestion.
fn clean_text(s: &str) -> String {
    s.to_lowercase().replace(char::is_whitespace, "_")
}

fn parse_line(line: &str, lineno: usize) -> Result<Option<Token>> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != COLUMNS {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected {COLUMNS} tab-separated columns, found {}", cols.len()),
        });
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        // multiword token range or empty node
        return Ok(None);
    }
    let idx: usize = id.parse().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("non-integer token ID {id:?}"),
    })?;
    if idx == 0 {
        return Err(Error::Parse {
            line: lineno,
            message: "token ID 0 is reserved".into(),
        });
    }
    let head: usize = cols[6].parse().map_err(|_| Error::Parse {
        line: lineno,
        message: format!("non-integer HEAD {:?}", cols[6]),
    })?;
    let deprel = cols[7];
    if deprel.is_empty() || deprel == "_" {
        return Err(Error::Parse {
            line: lineno,
            message: "missing DEPREL".into(),
        });
    }
    let form = clean_text(cols[1]);
    if form.is_empty() {
        return Err(Error::Parse {
            line: lineno,
            message: "empty FORM".into(),
        });
    }
    // "_" lemma means unavailable; fall back to the form so LEM stays usable.
    let lemma = if cols[2] == "_" { form.clone() } else { clean_text(cols[2]) };
    Ok(Some(Token {
        form,
        lemma,
        upos: cols[3].to_string(),
        head,
        deprel: deprel.to_string(),
    }))
}

/// Parse CoNLL-U, returning each sentence with the `# doc_id = ...` comment
/// value attached when present.
pub fn parse_conllu_keyed<B: BufRead>(reader: B) -> Result<Vec<(Option<String>, AnnotatedSentence)>> {
    let mut out = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut doc_id: Option<String> = None;
    let mut sentence_no = 0usize;

    let mut finish = |tokens: &mut Vec<Token>, doc_id: &mut Option<String>| -> Result<()> {
        if tokens.is_empty() {
            *doc_id = None;
            return Ok(());
        }
        sentence_no += 1;
        let n = sentence_no;
        let sent = AnnotatedSentence::new(std::mem::take(tokens)).map_err(|e| match e {
            Error::Structure { sentence, message } => Error::Structure {
                sentence: format!("#{n} {sentence}"),
                message,
            },
            other => other,
        })?;
        out.push((doc_id.take(), sent));
        Ok(())
    };

    let mut expected_id = 1usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() {
            finish(&mut tokens, &mut doc_id)?;
            expected_id = 1;
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(rest) = trimmed[1..].trim_start().strip_prefix("doc_id") {
                if let Some(v) = rest.trim_start().strip_prefix('=') {
                    doc_id = Some(v.trim().to_string());
                }
            }
            continue;
        }
        if let Some(token) = parse_line(trimmed, lineno)? {
            // IDs of basic tokens must be 1..n in order.
            let id: usize = trimmed.split('\t').next().unwrap().parse().unwrap();
            if id != expected_id {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("token ID {id} out of sequence (expected {expected_id})"),
                });
            }
            expected_id += 1;
            tokens.push(token);
        }
    }
    finish(&mut tokens, &mut doc_id)?;
    Ok(out)
}

/// Parse CoNLL-U into validated sentences.
pub fn parse_conllu<B: BufRead>(reader: B) -> Result<Vec<AnnotatedSentence>> {
    Ok(parse_conllu_keyed(reader)?.into_iter().map(|(_, s)| s).collect())
}

/// Serialize sentences back to CoNLL-U (the columns this pipeline uses;
/// XPOS, FEATS, DEPS and MISC are written as `_`).
pub fn write_conllu(sentences: &[AnnotatedSentence]) -> String {
    let mut out = String::new();
    for sent in sentences {
        for (i, t) in sent.tokens().iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_\n",
                i + 1,
                t.form,
                t.lemma,
                t.upos,
                t.head,
                t.deprel
            ));
        }
        out.push('\n');
    }
    out
}
