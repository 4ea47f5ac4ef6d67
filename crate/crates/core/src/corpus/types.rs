use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One token of a dependency-annotated sentence.
///
/// `head` is 0 for the syntactic root, otherwise the 1-based index of the
/// head token within the sentence. Forms and lemmas are lowercased at
/// ingestion; `upos` and `deprel` are kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub head: usize,
    pub deprel: String,
}

/// A validated dependency tree: exactly one root, no cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    tokens: Vec<Token>,
}

impl AnnotatedSentence {
    /// Validate the tree invariants and wrap the tokens.
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        let n = tokens.len();
        let name = || {
            let preview: Vec<&str> = tokens.iter().take(5).map(|t| t.form.as_str()).collect();
            format!("\"{}\"", preview.join(" "))
        };
        if n == 0 {
            return Err(Error::Structure {
                sentence: "<empty>".into(),
                message: "sentence has no tokens".into(),
            });
        }
        let mut root = None;
        for (i, tok) in tokens.iter().enumerate() {
            if tok.form.is_empty() {
                return Err(Error::Structure {
                    sentence: name(),
                    message: format!("token {} has an empty form", i + 1),
                });
            }
            if tok.deprel.is_empty() {
                return Err(Error::Structure {
                    sentence: name(),
                    message: format!("token {} has an empty deprel", i + 1),
                });
            }
            if tok.head > n {
                return Err(Error::Structure {
                    sentence: name(),
                    message: format!("token {} has head {} beyond sentence length {n}", i + 1, tok.head),
                });
            }
            if tok.head == i + 1 {
                return Err(Error::Structure {
                    sentence: name(),
                    message: format!("token {} is its own head", i + 1),
                });
            }
            if tok.head == 0 {
                if root.is_some() {
                    return Err(Error::Structure {
                        sentence: name(),
                        message: "more than one root".into(),
                    });
                }
                root = Some(i);
            }
        }
        if root.is_none() {
            return Err(Error::Structure {
                sentence: name(),
                message: "no root token (head = 0)".into(),
            });
        }
        // Walk head links from every token; with head != self this terminates
        // at the root unless there is a cycle, which the step bound catches.
        for start in 0..n {
            let mut cur = tokens[start].head;
            let mut steps = 0;
            while cur != 0 {
                cur = tokens[cur - 1].head;
                steps += 1;
                if steps > n {
                    return Err(Error::Structure {
                        sentence: name(),
                        message: format!("cycle in head links reachable from token {}", start + 1),
                    });
                }
            }
        }
        Ok(Self { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// 0-based index of the root token.
    pub fn root(&self) -> usize {
        self.tokens.iter().position(|t| t.head == 0).expect("validated")
    }
}

/// Binary document category; `Harmful` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Clean,
    Harmful,
}

impl Label {
    pub fn is_harmful(self) -> bool {
        matches!(self, Label::Harmful)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Clean => write!(f, "clean"),
            Label::Harmful => write!(f, "harmful"),
        }
    }
}

/// A labeled sample: raw text plus, when a companion treebank covers it,
/// dependency-annotated sentences. Unannotated documents stay usable for
/// the TOK scheme only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub id: String,
    pub text: String,
    pub sentences: Vec<AnnotatedSentence>,
    pub label: Label,
}

impl LabeledDocument {
    pub fn is_annotated(&self) -> bool {
        !self.sentences.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelCounts {
    pub clean: usize,
    pub harmful: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.clean + self.harmful
    }
}

/// A collection of labeled documents with unique ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub documents: Vec<LabeledDocument>,
}

impl LabeledCorpus {
    pub fn counts(&self) -> LabelCounts {
        let mut c = LabelCounts::default();
        for d in &self.documents {
            match d.label {
                Label::Clean => c.clean += 1,
                Label::Harmful => c.harmful += 1,
            }
        }
        c
    }

    pub fn labels(&self) -> Vec<Label> {
        self.documents.iter().map(|d| d.label).collect()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(form: &str, head: usize, deprel: &str) -> Token {
        Token {
            form: form.into(),
            lemma: form.into(),
            upos: "X".into(),
            head,
            deprel: deprel.into(),
        }
    }

    #[test]
    fn valid_tree_accepted() {
        let s = AnnotatedSentence::new(vec![
            tok("i", 2, "nsubj"),
            tok("like", 0, "root"),
            tok("dogs", 2, "obj"),
        ])
        .unwrap();
        assert_eq!(s.root(), 1);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn rejects_double_root() {
        let err = AnnotatedSentence::new(vec![tok("a", 0, "root"), tok("b", 0, "root")]).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }), "{err}");
    }

    #[test]
    fn rejects_missing_root_and_cycle() {
        // 1 -> 2 -> 1 cycle, no root
        let err = AnnotatedSentence::new(vec![tok("a", 2, "dep"), tok("b", 1, "dep")]).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }));
        // root exists but 2 <-> 3 cycle
        let err = AnnotatedSentence::new(vec![
            tok("r", 0, "root"),
            tok("a", 3, "dep"),
            tok("b", 2, "dep"),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Structure { .. }));
    }

    #[test]
    fn rejects_self_head_and_out_of_range() {
        let err = AnnotatedSentence::new(vec![tok("a", 1, "dep")]).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }));
        let err = AnnotatedSentence::new(vec![tok("a", 5, "dep")]).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }));
    }

    #[test]
    fn counts_sum_to_total() {
        let doc = |id: &str, label| LabeledDocument {
            id: id.into(),
            text: String::new(),
            sentences: vec![],
            label,
        };
        let corpus = LabeledCorpus {
            documents: vec![doc("a", Label::Clean), doc("b", Label::Harmful), doc("c", Label::Clean)],
        };
        let c = corpus.counts();
        assert_eq!((c.clean, c.harmful), (2, 1));
        assert_eq!(c.total(), corpus.len());
    }
}
