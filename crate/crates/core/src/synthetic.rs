//! Seeded synthetic corpora with known structure. These back the
//! self-contained quality checks: a synonym corpus where embedding
//! geometry is forced by construction, and a separable labeled corpus
//! where a keyword oracle scores a perfect F1.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{AnnotatedSentence, Label, LabeledCorpus, LabeledDocument, Token};
use crate::util::{mix_seed, seeded_rng};

const SALT_SYNONYM: u64 = 0x53_594e;
const SALT_SEPARABLE: u64 = 0x53_4550;
const SALT_SHUFFLE_LABELS: u64 = 0x4c_4142;

/// Two groups of interchangeable target words. Words inside a group are
/// drawn from identical context distributions; the groups' context
/// vocabularies are disjoint.
pub const SYNONYM_GROUPS: [[&str; 3]; 2] = [
    ["river", "stream", "brook"],
    ["ember", "flame", "blaze"],
];

const SYNONYM_CONTEXTS: [[&str; 8]; 2] = [
    ["cold", "wet", "bank", "flow", "deep", "clear", "fish", "stone"],
    ["hot", "burn", "ash", "glow", "spark", "smoke", "coal", "warm"],
];

/// Sentences interleaving one synonym group's words with its private
/// context vocabulary, totalling at least `min_tokens` tokens. Trained
/// embeddings must place within-group pairs closer than cross-group pairs.
pub fn synonym_corpus(seed: u64, min_tokens: usize) -> Vec<Vec<String>> {
    let mut rng = seeded_rng(mix_seed(seed, SALT_SYNONYM));
    let mut sentences = Vec::new();
    let mut tokens = 0usize;
    while tokens < min_tokens {
        let g = rng.gen_range(0..2usize);
        let len = rng.gen_range(7..=11);
        let mut sentence = Vec::with_capacity(len);
        for pos in 0..len {
            let word = if pos % 2 == 0 {
                SYNONYM_CONTEXTS[g][rng.gen_range(0..SYNONYM_CONTEXTS[g].len())]
            } else {
                SYNONYM_GROUPS[g][rng.gen_range(0..SYNONYM_GROUPS[g].len())]
            };
            sentence.push(word.to_string());
        }
        tokens += sentence.len();
        sentences.push(sentence);
    }
    sentences
}

/// (lemma, upos, surface forms) — the first form equals the lemma.
type Entry = (&'static str, &'static str, &'static [&'static str]);

/// The twenty insult words that mark a document harmful. Each has a single
/// surface form so every word recurs often enough across documents that
/// held-out folds are classifiable from words seen in the training folds
/// alone (clean entries carry the inflection variety instead).
pub const TOXIC_ENTRIES: [Entry; 20] = [
    ("idiot", "NOUN", &["idiot"]),
    ("loser", "NOUN", &["loser"]),
    ("jerk", "NOUN", &["jerk"]),
    ("creep", "NOUN", &["creep"]),
    ("fool", "NOUN", &["fool"]),
    ("moron", "NOUN", &["moron"]),
    ("clown", "NOUN", &["clown"]),
    ("freak", "NOUN", &["freak"]),
    ("dork", "NOUN", &["dork"]),
    ("weirdo", "NOUN", &["weirdo"]),
    ("stupid", "ADJ", &["stupid"]),
    ("dumb", "ADJ", &["dumb"]),
    ("ugly", "ADJ", &["ugly"]),
    ("pathetic", "ADJ", &["pathetic"]),
    ("worthless", "ADJ", &["worthless"]),
    ("gross", "ADJ", &["gross"]),
    ("lame", "ADJ", &["lame"]),
    ("annoying", "ADJ", &["annoying"]),
    ("nasty", "ADJ", &["nasty"]),
    ("hateful", "ADJ", &["hateful"]),
];

const CLEAN_ENTRIES: [Entry; 28] = [
    ("school", "NOUN", &["school", "schools"]),
    ("friend", "NOUN", &["friend", "friends"]),
    ("music", "NOUN", &["music"]),
    ("game", "NOUN", &["game", "games"]),
    ("lunch", "NOUN", &["lunch", "lunches"]),
    ("weekend", "NOUN", &["weekend", "weekends"]),
    ("movie", "NOUN", &["movie", "movies"]),
    ("class", "NOUN", &["class", "classes"]),
    ("team", "NOUN", &["team", "teams"]),
    ("party", "NOUN", &["party", "parties"]),
    ("book", "NOUN", &["book", "books"]),
    ("photo", "NOUN", &["photo", "photos"]),
    ("song", "NOUN", &["song", "songs"]),
    ("beach", "NOUN", &["beach", "beaches"]),
    ("birthday", "NOUN", &["birthday", "birthdays"]),
    ("like", "VERB", &["like", "likes", "liked"]),
    ("play", "VERB", &["play", "plays", "played"]),
    ("watch", "VERB", &["watch", "watches", "watched"]),
    ("enjoy", "VERB", &["enjoy", "enjoys", "enjoyed"]),
    ("share", "VERB", &["share", "shares", "shared"]),
    ("meet", "VERB", &["meet", "meets"]),
    ("read", "VERB", &["read", "reads"]),
    ("fun", "ADJ", &["fun"]),
    ("cool", "ADJ", &["cool", "coolest"]),
    ("nice", "ADJ", &["nice", "nicest"]),
    ("great", "ADJ", &["great", "greatest"]),
    ("happy", "ADJ", &["happy", "happiest"]),
    ("sunny", "ADJ", &["sunny", "sunnier"]),
];

const DEPRELS: [&str; 7] = ["nsubj", "obj", "obl", "advmod", "amod", "conj", "nmod"];

/// How many documents [`separable_corpus`] produces.
pub const SEPARABLE_DOCS: usize = 200;
/// Fraction of harmful documents in [`separable_corpus`].
pub const SEPARABLE_HARMFUL_EVERY: usize = 10;

fn draw_token<G: Rng>(rng: &mut G, entry: &Entry) -> Token {
    let (lemma, upos, forms) = entry;
    let form = forms[rng.gen_range(0..forms.len())];
    Token {
        form: form.to_string(),
        lemma: lemma.to_string(),
        upos: upos.to_string(),
        head: 0,
        deprel: String::new(),
    }
}

fn assemble_sentence(mut tokens: Vec<Token>) -> AnnotatedSentence {
    for (i, tok) in tokens.iter_mut().enumerate() {
        if i == 0 {
            tok.head = 0;
            tok.deprel = "root".into();
        } else {
            tok.head = 1;
            tok.deprel = DEPRELS[(i - 1) % DEPRELS.len()].into();
        }
    }
    AnnotatedSentence::new(tokens).expect("flat tree is always valid")
}

/// 200 annotated documents, exactly 10% harmful. Harmful documents carry
/// 4-6 tokens drawn from [`TOXIC_ENTRIES`]; clean documents carry none, so
/// matching on toxic lemmas (or any of their surface forms) classifies the
/// corpus perfectly. Surface forms are inflected, making the TOK and LEM
/// streams genuinely different.
pub fn separable_corpus(seed: u64) -> LabeledCorpus {
    let mut rng = seeded_rng(mix_seed(seed, SALT_SEPARABLE));
    let mut documents = Vec::with_capacity(SEPARABLE_DOCS);
    for i in 0..SEPARABLE_DOCS {
        let harmful = i % SEPARABLE_HARMFUL_EVERY == 0;
        let clean_count = rng.gen_range(6..=10);
        let mut tokens: Vec<Token> = (0..clean_count)
            .map(|_| {
                let entry = &CLEAN_ENTRIES[rng.gen_range(0..CLEAN_ENTRIES.len())];
                draw_token(&mut rng, entry)
            })
            .collect();
        if harmful {
            for _ in 0..rng.gen_range(4..=6usize) {
                let entry = &TOXIC_ENTRIES[rng.gen_range(0..TOXIC_ENTRIES.len())];
                // keep insults near the front so every early position sees
                // toxic mass often enough for position-sensitive models to
                // generalize across folds
                let pos = rng.gen_range(0..=tokens.len().min(5));
                tokens.insert(pos, draw_token(&mut rng, entry));
            }
        }
        let text = tokens
            .iter()
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let sentence = assemble_sentence(tokens);
        documents.push(LabeledDocument {
            id: format!("doc{i:04}"),
            text,
            sentences: vec![sentence],
            label: if harmful { Label::Harmful } else { Label::Clean },
        });
    }
    LabeledCorpus { documents }
}

/// The same documents with labels permuted at random (label counts are
/// preserved). Any real signal between text and label is destroyed, so a
/// sound pipeline cannot beat chance on the harmful class.
pub fn shuffle_labels(corpus: &LabeledCorpus, seed: u64) -> LabeledCorpus {
    let mut rng = seeded_rng(mix_seed(seed, SALT_SHUFFLE_LABELS));
    let mut labels: Vec<Label> = corpus.documents.iter().map(|d| d.label).collect();
    labels.shuffle(&mut rng);
    let documents = corpus
        .documents
        .iter()
        .zip(labels)
        .map(|(d, label)| LabeledDocument { label, ..d.clone() })
        .collect();
    LabeledCorpus { documents }
}

/// Brute-force keyword classifier: harmful iff any token's lemma or form
/// matches a toxic entry. On [`separable_corpus`] this scores F1 = 1.
pub fn keyword_oracle(doc: &LabeledDocument) -> Label {
    let toxic = |s: &str| {
        TOXIC_ENTRIES
            .iter()
            .any(|(lemma, _, forms)| *lemma == s || forms.contains(&s))
    };
    let hit = doc
        .sentences
        .iter()
        .flat_map(|s| s.tokens())
        .any(|t| toxic(&t.lemma) || toxic(&t.form));
    if hit {
        Label::Harmful
    } else {
        Label::Clean
    }
}
