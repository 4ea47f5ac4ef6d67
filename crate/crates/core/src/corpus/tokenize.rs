use crate::error::Error;

fn is_detachable(c: char) -> bool {
    c.is_ascii_punctuation()
}

/// Rule-based fallback tokenizer for raw text (TOK-only documents).
///
/// Splits on whitespace, detaches leading/trailing ASCII punctuation as
/// separate units, lowercases everything.
pub fn tokenize_raw(text: &str) -> Vec<String> {
    let mut units = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        let mut leading = Vec::new();
        while start < end && is_detachable(chars[start]) {
            leading.push(chars[start].to_string());
            start += 1;
        }
        let mut trailing = Vec::new();
        while end > start && is_detachable(chars[end - 1]) {
            trailing.push(chars[end - 1].to_string());
            end -= 1;
        }
        units.extend(leading);
        if start < end {
            let core: String = chars[start..end].iter().collect();
            units.push(core.to_lowercase());
        }
        units.extend(trailing.into_iter().rev());
    }
    units
}

/// Write unit streams as one-sentence-per-line, space-separated text.
pub fn write_units<W: std::io::Write>(mut w: W, sentences: &[Vec<String>]) -> std::io::Result<()> {
    for sent in sentences {
        writeln!(w, "{}", sent.join(" "))?;
    }
    Ok(())
}

/// Read unit streams written by [`write_units`]. Blank lines are skipped.
pub fn read_units<B: std::io::BufRead>(reader: B) -> Result<Vec<Vec<String>>, Error> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let units: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if !units.is_empty() {
            out.push(units);
        }
    }
    Ok(out)
}
