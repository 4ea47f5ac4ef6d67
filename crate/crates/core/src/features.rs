//! Feature encoding: unit streams for five schemes and (target, context)
//! training pairs from sliding windows or dependency arcs.
//!
//! Surface format is fixed for reproducibility: DEP units are
//! `head|deprel|dependent`, DEPC contexts are `unit/deprel` with the
//! inverse direction marked `-1`. `|` and `/` are reserved and stripped
//! from forms before composing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize_raw, AnnotatedSentence, LabeledDocument};
use crate::error::{Error, Result};

/// The six encodings. DEPC defines contexts, not a unit stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureScheme {
    #[serde(rename = "TOK")]
    Tok,
    #[serde(rename = "LEM")]
    Lem,
    #[serde(rename = "TOKPOS")]
    TokPos,
    #[serde(rename = "LEMPOS")]
    LemPos,
    #[serde(rename = "DEP")]
    Dep,
    #[serde(rename = "DEPC")]
    DepC,
}

impl FeatureScheme {
    pub const ALL: [FeatureScheme; 6] = [
        FeatureScheme::Tok,
        FeatureScheme::Lem,
        FeatureScheme::TokPos,
        FeatureScheme::LemPos,
        FeatureScheme::Dep,
        FeatureScheme::DepC,
    ];

    /// Whether the scheme defines a unit stream (all but DEPC).
    pub fn is_unit_scheme(self) -> bool {
        !matches!(self, FeatureScheme::DepC)
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureScheme::Tok => "TOK",
            FeatureScheme::Lem => "LEM",
            FeatureScheme::TokPos => "TOKPOS",
            FeatureScheme::LemPos => "LEMPOS",
            FeatureScheme::Dep => "DEP",
            FeatureScheme::DepC => "DEPC",
        }
    }
}

impl std::fmt::Display for FeatureScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FeatureScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TOK" => Ok(FeatureScheme::Tok),
            "LEM" => Ok(FeatureScheme::Lem),
            "TOKPOS" => Ok(FeatureScheme::TokPos),
            "LEMPOS" => Ok(FeatureScheme::LemPos),
            "DEP" => Ok(FeatureScheme::Dep),
            "DEPC" => Ok(FeatureScheme::DepC),
            other => Err(Error::InvalidScheme(other.to_string())),
        }
    }
}

/// Whether DEP/DEPC compose over word forms or lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSource {
    Forms,
    Lemmas,
}

/// A directed (target, context) training pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrainingPair {
    pub target: String,
    pub context: String,
}

impl TrainingPair {
    pub fn new(target: impl Into<String>, context: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            context: context.into(),
        }
    }
}

/// Strip the reserved separators; an emptied unit degrades to "_" so no
/// scheme ever emits an empty feature unit.
fn sanitize(s: &str) -> String {
    if !s.contains(['|', '/']) {
        return s.to_string();
    }
    let cleaned: String = s.chars().filter(|c| *c != '|' && *c != '/').collect();
    if cleaned.is_empty() {
        "_".to_string()
    } else {
        cleaned
    }
}

fn source_unit(sentence: &AnnotatedSentence, idx: usize, source: UnitSource) -> String {
    let tok = &sentence.tokens()[idx];
    match source {
        UnitSource::Forms => sanitize(&tok.form),
        UnitSource::Lemmas => sanitize(&tok.lemma),
    }
}

/// Encode one sentence into feature units under a unit scheme.
pub fn encode_units(sentence: &AnnotatedSentence, scheme: FeatureScheme) -> Result<Vec<String>> {
    match scheme {
        FeatureScheme::Tok => Ok(sentence.tokens().iter().map(|t| t.form.clone()).collect()),
        FeatureScheme::Lem => Ok(sentence.tokens().iter().map(|t| t.lemma.clone()).collect()),
        FeatureScheme::TokPos => Ok(sentence
            .tokens()
            .iter()
            .map(|t| format!("{}_{}", t.form, t.upos))
            .collect()),
        FeatureScheme::LemPos => Ok(sentence
            .tokens()
            .iter()
            .map(|t| format!("{}_{}", t.lemma, t.upos))
            .collect()),
        FeatureScheme::Dep => Ok(dep_units(sentence, UnitSource::Forms)),
        FeatureScheme::DepC => Err(Error::InvalidScheme(
            "DEPC defines contexts, not a unit stream".into(),
        )),
    }
}

/// DEP units: one `head|deprel|dependent` triple per non-root token,
/// ordered by the dependent's position.
pub fn dep_units(sentence: &AnnotatedSentence, source: UnitSource) -> Vec<String> {
    let mut units = Vec::with_capacity(sentence.len().saturating_sub(1));
    for (i, tok) in sentence.tokens().iter().enumerate() {
        if tok.head == 0 {
            continue;
        }
        let head = source_unit(sentence, tok.head - 1, source);
        let dep = source_unit(sentence, i, source);
        units.push(format!("{head}|{}|{dep}", sanitize(&tok.deprel)));
    }
    units
}

/// Unit stream of a labeled document. Unannotated documents are usable
/// only under TOK (via the fallback tokenizer); any other scheme is an
/// error rather than a silent fallback.
pub fn document_units(doc: &LabeledDocument, scheme: FeatureScheme) -> Result<Vec<String>> {
    if !scheme.is_unit_scheme() {
        return Err(Error::InvalidScheme(
            "DEPC defines contexts, not a unit stream".into(),
        ));
    }
    if !doc.is_annotated() {
        if scheme == FeatureScheme::Tok {
            return Ok(tokenize_raw(&doc.text));
        }
        return Err(Error::AnnotationRequired(format!(
            "document {:?} has no dependency annotation; scheme {scheme} needs it",
            doc.id
        )));
    }
    let mut units = Vec::new();
    for sent in &doc.sentences {
        units.extend(encode_units(sent, scheme)?);
    }
    Ok(units)
}

pub(crate) fn window_pair_indices(
    n: usize,
    window: usize,
    mut width_at: impl FnMut(usize) -> usize,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..n {
        let w = width_at(i).min(window).max(1);
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(n - 1);
        for j in lo..=hi {
            if j != i {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Deterministic sliding-window pairs: every (i, j), j != i, |i - j| <= window.
pub fn window_pairs(units: &[String], window: usize) -> Result<Vec<TrainingPair>> {
    if window == 0 {
        return Err(Error::Param("window must be >= 1".into()));
    }
    if units.is_empty() {
        return Ok(Vec::new());
    }
    Ok(window_pair_indices(units.len(), window, |_| window)
        .into_iter()
        .map(|(i, j)| TrainingPair::new(units[i].clone(), units[j].clone()))
        .collect())
}

/// Window pairs with the per-position width drawn uniformly from
/// 1..=window, the usual skip-gram window shrinking.
pub fn window_pairs_shrunk<G: Rng>(
    units: &[String],
    window: usize,
    rng: &mut G,
) -> Result<Vec<TrainingPair>> {
    if window == 0 {
        return Err(Error::Param("window must be >= 1".into()));
    }
    if units.is_empty() {
        return Ok(Vec::new());
    }
    Ok(window_pair_indices(units.len(), window, |_| rng.gen_range(1..=window))
        .into_iter()
        .map(|(i, j)| TrainingPair::new(units[i].clone(), units[j].clone()))
        .collect())
}

/// Dependency-based context pairs: each arc head --deprel--> dependent
/// contributes (head, dependent/deprel) and (dependent, head/deprel-1).
/// Targets are plain units; contexts carry the relation suffix.
pub fn dependency_pairs(sentence: &AnnotatedSentence, source: UnitSource) -> Vec<TrainingPair> {
    let mut pairs = Vec::with_capacity(2 * sentence.len().saturating_sub(1));
    for (i, tok) in sentence.tokens().iter().enumerate() {
        if tok.head == 0 {
            continue;
        }
        let head = source_unit(sentence, tok.head - 1, source);
        let dep = source_unit(sentence, i, source);
        let rel = sanitize(&tok.deprel);
        pairs.push(TrainingPair::new(head.clone(), format!("{dep}/{rel}")));
        pairs.push(TrainingPair::new(dep, format!("{head}/{rel}-1")));
    }
    pairs
}

/// Dependency pairs for a whole document; errors when annotation is missing.
pub fn document_dependency_pairs(doc: &LabeledDocument, source: UnitSource) -> Result<Vec<TrainingPair>> {
    if !doc.is_annotated() {
        return Err(Error::AnnotationRequired(format!(
            "document {:?} has no dependency annotation",
            doc.id
        )));
    }
    Ok(doc
        .sentences
        .iter()
        .flat_map(|s| dependency_pairs(s, source))
        .collect())
}

/// Write training pairs as two-column TSV.
pub fn write_pairs<W: std::io::Write>(mut w: W, pairs: &[TrainingPair]) -> std::io::Result<()> {
    for p in pairs {
        writeln!(w, "{}\t{}", p.target, p.context)?;
    }
    Ok(())
}

/// Read training pairs written by [`write_pairs`].
pub fn read_pairs<B: std::io::BufRead>(reader: B) -> Result<Vec<TrainingPair>> {
    let mut pairs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(t), Some(c), None) if !t.is_empty() && !c.is_empty() => {
                pairs.push(TrainingPair::new(t, c));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "pair line must be exactly `target<TAB>context`".into(),
                })
            }
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;

    fn like_dogs() -> AnnotatedSentence {
        let tok = |form: &str, lemma: &str, upos: &str, head, deprel: &str| Token {
            form: form.into(),
            lemma: lemma.into(),
            upos: upos.into(),
            head,
            deprel: deprel.into(),
        };
        AnnotatedSentence::new(vec![
            tok("i", "i", "PRON", 2, "nsubj"),
            tok("like", "like", "VERB", 0, "root"),
            tok("dogs", "dog", "NOUN", 2, "obj"),
        ])
        .unwrap()
    }

    #[test]
    fn unit_schemes() {
        let s = like_dogs();
        assert_eq!(encode_units(&s, FeatureScheme::Tok).unwrap(), ["i", "like", "dogs"]);
        assert_eq!(encode_units(&s, FeatureScheme::Lem).unwrap(), ["i", "like", "dog"]);
        assert_eq!(
            encode_units(&s, FeatureScheme::TokPos).unwrap(),
            ["i_PRON", "like_VERB", "dogs_NOUN"]
        );
        assert_eq!(
            encode_units(&s, FeatureScheme::LemPos).unwrap(),
            ["i_PRON", "like_VERB", "dog_NOUN"]
        );
    }

    #[test]
    fn dep_units_enumerate_non_root_arcs() {
        // arcs by hand: like -nsubj-> i, like -obj-> dogs
        let s = like_dogs();
        assert_eq!(
            encode_units(&s, FeatureScheme::Dep).unwrap(),
            ["like|nsubj|i", "like|obj|dogs"]
        );
        assert_eq!(dep_units(&s, UnitSource::Lemmas), ["like|nsubj|i", "like|obj|dog"]);
    }

    #[test]
    fn depc_has_no_unit_stream() {
        assert!(matches!(
            encode_units(&like_dogs(), FeatureScheme::DepC).unwrap_err(),
            Error::InvalidScheme(_)
        ));
    }

    #[test]
    fn window_pairs_l1() {
        let units: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let pairs = window_pairs(&units, 1).unwrap();
        let expect: Vec<TrainingPair> = [("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")]
            .iter()
            .map(|(t, c)| TrainingPair::new(*t, *c))
            .collect();
        assert_eq!(pairs, expect);
    }

    #[test]
    fn window_pairs_edge_cases() {
        let single = vec!["a".to_string()];
        assert!(window_pairs(&single, 5).unwrap().is_empty());
        assert!(matches!(window_pairs(&single, 0).unwrap_err(), Error::Param(_)));
        let four: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        assert_eq!(window_pairs(&four, 2).unwrap().len(), 10);
    }

    #[test]
    fn window_pairs_match_brute_force() {
        // brute-force double loop over all (i, j) with |i - j| <= L
        for n in 0..12usize {
            for window in 1..=4usize {
                let units: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
                let got = window_pairs(&units, window).unwrap();
                let mut expect = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        if i != j && i.abs_diff(j) <= window {
                            expect.push(TrainingPair::new(units[i].clone(), units[j].clone()));
                        }
                    }
                }
                // same multiset; construction order also matches
                assert_eq!(got, expect, "n={n} window={window}");
            }
        }
    }

    #[test]
    fn shrunk_window_stays_within_bounds() {
        let mut rng = crate::util::seeded_rng(9);
        let units: Vec<String> = (0..20).map(|i| format!("u{i}")).collect();
        for _ in 0..50 {
            let pairs = window_pairs_shrunk(&units, 4, &mut rng).unwrap();
            assert!(!pairs.is_empty());
            for p in &pairs {
                let ti: usize = p.target[1..].parse().unwrap();
                let ci: usize = p.context[1..].parse().unwrap();
                assert!(ti.abs_diff(ci) <= 4 && ti != ci);
            }
        }
    }

    #[test]
    fn dependency_pairs_both_directions() {
        let s = like_dogs();
        let pairs = dependency_pairs(&s, UnitSource::Forms);
        let expect: Vec<TrainingPair> = [
            ("like", "i/nsubj"),
            ("i", "like/nsubj-1"),
            ("like", "dogs/obj"),
            ("dogs", "like/obj-1"),
        ]
        .iter()
        .map(|(t, c)| TrainingPair::new(*t, *c))
        .collect();
        assert_eq!(pairs, expect);
    }

    #[test]
    fn dependency_pairs_counts() {
        let root_only = AnnotatedSentence::new(vec![Token {
            form: "hi".into(),
            lemma: "hi".into(),
            upos: "INTJ".into(),
            head: 0,
            deprel: "root".into(),
        }])
        .unwrap();
        assert!(dependency_pairs(&root_only, UnitSource::Forms).is_empty());
        assert_eq!(dependency_pairs(&like_dogs(), UnitSource::Forms).len(), 2 * (3 - 1));
    }

    #[test]
    fn reserved_separators_are_stripped() {
        let s = AnnotatedSentence::new(vec![
            Token {
                form: "a|b".into(),
                lemma: "a|b".into(),
                upos: "X".into(),
                head: 0,
                deprel: "root".into(),
            },
            Token {
                form: "c/d".into(),
                lemma: "c/d".into(),
                upos: "X".into(),
                head: 1,
                deprel: "dep".into(),
            },
        ])
        .unwrap();
        assert_eq!(encode_units(&s, FeatureScheme::Dep).unwrap(), ["ab|dep|cd"]);
        let pairs = dependency_pairs(&s, UnitSource::Forms);
        assert_eq!(pairs[0], TrainingPair::new("ab", "cd/dep"));
        assert_eq!(pairs[1], TrainingPair::new("cd", "ab/dep-1"));
    }

    #[test]
    fn no_scheme_emits_empty_units() {
        let s = like_dogs();
        for scheme in FeatureScheme::ALL.iter().filter(|s| s.is_unit_scheme()) {
            for u in encode_units(&s, *scheme).unwrap() {
                assert!(!u.is_empty());
            }
        }
    }

    #[test]
    fn unannotated_document_is_tok_only() {
        let doc = LabeledDocument {
            id: "d1".into(),
            text: "You are ugly!".into(),
            sentences: vec![],
            label: crate::corpus::Label::Harmful,
        };
        assert_eq!(document_units(&doc, FeatureScheme::Tok).unwrap(), ["you", "are", "ugly", "!"]);
        assert!(matches!(
            document_units(&doc, FeatureScheme::Lem).unwrap_err(),
            Error::AnnotationRequired(_)
        ));
        assert!(matches!(
            document_dependency_pairs(&doc, UnitSource::Forms).unwrap_err(),
            Error::AnnotationRequired(_)
        ));
    }

    #[test]
    fn pair_file_round_trip() {
        let pairs = dependency_pairs(&like_dogs(), UnitSource::Forms);
        let mut buf = Vec::new();
        write_pairs(&mut buf, &pairs).unwrap();
        assert_eq!(read_pairs(buf.as_slice()).unwrap(), pairs);
    }

    #[test]
    fn scheme_parse_and_display() {
        for scheme in FeatureScheme::ALL {
            let round: FeatureScheme = scheme.name().parse().unwrap();
            assert_eq!(round, scheme);
        }
        assert!("BOGUS".parse::<FeatureScheme>().is_err());
    }
}
