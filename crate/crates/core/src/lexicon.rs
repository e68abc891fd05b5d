//! Co-occurrence statistics, pointwise mutual information and semantic
//! orientation against positive/negative paradigm terms.
//!
//! `PMI(x, y) = log2(N * c(x,y) / (c(x) * c(y)))`, which is the probability
//! form with `p = c / N`. Pair counts get additive smoothing `k` so that terms
//! that never co-occur keep a finite PMI; `k = 0` gives the exact ratio.
//!
//! `SO(t) = sum over Pos of PMI(t, p) - sum over Neg of PMI(t, n)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::{normalize_inflection, tokenize, Document};

pub const DEFAULT_SMOOTHING: f64 = 0.01;

pub const DEFAULT_POSITIVE: [&str; 7] =
    ["good", "nice", "excellent", "positive", "fortunate", "correct", "superior"];
pub const DEFAULT_NEGATIVE: [&str; 7] =
    ["bad", "nasty", "poor", "negative", "unfortunate", "wrong", "inferior"];

/// Words dropped before mean-SO classification.
pub const STOP_WORDS: [&str; 50] = [
    "a", "about", "all", "an", "and", "any", "are", "as", "at", "be", "been", "but", "by", "can",
    "do", "for", "from", "had", "has", "have", "he", "her", "his", "i", "if", "in", "is", "it",
    "its", "me", "my", "no", "not", "of", "on", "or", "our", "she", "so", "that", "the", "their",
    "they", "this", "to", "was", "we", "were", "with", "you",
];

pub fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.binary_search(&token).is_ok()
}

#[derive(Debug, Error, PartialEq)]
pub enum LexiconError {
    #[error("cannot build co-occurrence counts from an empty corpus")]
    EmptyCorpus,
    #[error("term `{0}` is not in the co-occurrence table")]
    UnknownTerm(String),
    #[error("`{0}` and `{1}` never co-occur and smoothing is zero")]
    ZeroCooccurrence(String, String),
    #[error("none of the paradigm terms occur in the table")]
    NoParadigmTerms,
    #[error("paradigm sets must both be non-empty")]
    EmptyParadigm,
    #[error("paradigm term `{0}` is both positive and negative")]
    OverlappingParadigm(String),
    #[error("paradigm file line {line}: expected `+term` or `-term`, got `{text}`")]
    ParadigmSyntax { line: usize, text: String },
    #[error("document `{0}` has no in-vocabulary content terms (unclassifiable)")]
    Unclassifiable(String),
    #[error("window size must be at least 1")]
    ZeroWindow,
    #[error("smoothing must be finite and non-negative")]
    BadSmoothing,
}

/// What counts as one co-occurrence context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextMode {
    Document,
    /// Sliding windows of `k` tokens; documents shorter than `k` form one window.
    Window(usize),
}

fn pair_key<'a>(x: &'a str, y: &'a str) -> (&'a str, &'a str) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Unigram and unordered-pair context counts over normalized tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceTable {
    contexts: u64,
    unigram: BTreeMap<String, u64>,
    pair: BTreeMap<(String, String), u64>,
    mode: ContextMode,
    smoothing: f64,
}

impl CooccurrenceTable {
    pub fn build(docs: &[Document], mode: ContextMode) -> Result<Self, LexiconError> {
        if docs.is_empty() {
            return Err(LexiconError::EmptyCorpus);
        }
        let mut contexts = Vec::new();
        for doc in docs {
            let tokens: Vec<String> = doc.tokens().iter().map(|t| normalize_inflection(t)).collect();
            match mode {
                ContextMode::Document => contexts.push(tokens),
                ContextMode::Window(0) => return Err(LexiconError::ZeroWindow),
                ContextMode::Window(k) if tokens.len() <= k => contexts.push(tokens),
                ContextMode::Window(k) => contexts.extend(tokens.windows(k).map(|w| w.to_vec())),
            }
        }
        let mut table = CooccurrenceTable {
            contexts: contexts.len() as u64,
            unigram: BTreeMap::new(),
            pair: BTreeMap::new(),
            mode,
            smoothing: DEFAULT_SMOOTHING,
        };
        for context in contexts {
            let present: BTreeSet<String> = context.into_iter().collect();
            let present: Vec<&String> = present.iter().collect();
            for (i, x) in present.iter().enumerate() {
                *table.unigram.entry((*x).clone()).or_insert(0) += 1;
                for y in &present[i + 1..] {
                    *table.pair.entry(((*x).clone(), (*y).clone())).or_insert(0) += 1;
                }
            }
        }
        Ok(table)
    }

    pub fn with_smoothing(mut self, k: f64) -> Result<Self, LexiconError> {
        if !k.is_finite() || k < 0.0 {
            return Err(LexiconError::BadSmoothing);
        }
        self.smoothing = k;
        Ok(self)
    }

    /// Total number of contexts, `N`.
    pub fn contexts(&self) -> u64 {
        self.contexts
    }

    pub fn mode(&self) -> ContextMode {
        self.mode
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn count(&self, term: &str) -> u64 {
        self.unigram.get(term).copied().unwrap_or(0)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.unigram.contains_key(term)
    }

    pub fn pair_count(&self, x: &str, y: &str) -> u64 {
        if x == y {
            return self.count(x);
        }
        let (a, b) = pair_key(x, y);
        self.pair
            .get(&(a.to_string(), b.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.unigram.keys().map(String::as_str)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.pair.iter().map(|((a, b), c)| (a.as_str(), b.as_str(), *c))
    }

    /// PMI in bits.
    pub fn pmi(&self, x: &str, y: &str) -> Result<f64, LexiconError> {
        let cx = self.unigram.get(x).ok_or_else(|| LexiconError::UnknownTerm(x.into()))?;
        let cy = self.unigram.get(y).ok_or_else(|| LexiconError::UnknownTerm(y.into()))?;
        let joint = self.pair_count(x, y) as f64 + self.smoothing;
        if joint == 0.0 {
            return Err(LexiconError::ZeroCooccurrence(x.into(), y.into()));
        }
        Ok((self.contexts as f64 * joint / (*cx as f64 * *cy as f64)).log2())
    }

    /// Semantic orientation of `term`. Paradigm terms missing from the table
    /// are skipped and listed in the result.
    pub fn semantic_orientation(
        &self,
        paradigms: &ParadigmSets,
        term: &str,
    ) -> Result<Orientation, LexiconError> {
        if !self.contains(term) {
            return Err(LexiconError::UnknownTerm(term.into()));
        }
        let mut value = 0.0;
        let mut used = 0usize;
        let mut skipped = Vec::new();
        for (set, weight) in [(&paradigms.positive, 1.0), (&paradigms.negative, -1.0)] {
            for p in set {
                if self.contains(p) {
                    value += weight * self.pmi(term, p)?;
                    used += 1;
                } else {
                    skipped.push(p.clone());
                }
            }
        }
        if used == 0 {
            return Err(LexiconError::NoParadigmTerms);
        }
        Ok(Orientation { value, skipped })
    }

    /// Lexicon dump: `term<TAB>SO`, sorted by term, for every term whose
    /// orientation is defined.
    pub fn dump(&self, paradigms: &ParadigmSets) -> Result<String, LexiconError> {
        let mut out = String::new();
        for term in self.terms() {
            let so = self.semantic_orientation(paradigms, term)?;
            let _ = writeln!(out, "{term}\t{}", so.value);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orientation {
    pub value: f64,
    /// Paradigm terms that were absent from the table.
    pub skipped: Vec<String>,
}

/// Positive and negative seed terms, normalized, non-empty and disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadigmSets {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl ParadigmSets {
    pub fn new<P, N>(positive: P, negative: N) -> Result<Self, LexiconError>
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        N: IntoIterator,
        N::Item: AsRef<str>,
    {
        let fold = |t: &str| normalize_inflection(&t.trim().to_lowercase());
        let positive: BTreeSet<String> = positive.into_iter().map(|t| fold(t.as_ref())).collect();
        let negative: BTreeSet<String> = negative.into_iter().map(|t| fold(t.as_ref())).collect();
        if positive.is_empty() || negative.is_empty() {
            return Err(LexiconError::EmptyParadigm);
        }
        if let Some(both) = positive.intersection(&negative).next() {
            return Err(LexiconError::OverlappingParadigm(both.clone()));
        }
        Ok(ParadigmSets { positive, negative })
    }

    /// Reads `+term` / `-term` lines; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || LexiconError::ParadigmSyntax {
                line: i + 1,
                text: line.to_string(),
            };
            let (sign, term) = line.split_at(1);
            let term = term.trim();
            if term.is_empty() {
                return Err(bad());
            }
            match sign {
                "+" => pos.push(term.to_string()),
                "-" => neg.push(term.to_string()),
                _ => return Err(bad()),
            }
        }
        ParadigmSets::new(pos, neg)
    }

    pub fn swapped(&self) -> Self {
        ParadigmSets {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }

    pub fn positive(&self) -> &BTreeSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<String> {
        &self.negative
    }
}

impl Default for ParadigmSets {
    fn default() -> Self {
        ParadigmSets::new(DEFAULT_POSITIVE, DEFAULT_NEGATIVE).expect("default paradigms are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub score: f64,
    /// Number of token occurrences that contributed to the mean.
    pub terms_used: usize,
}

/// Co-occurrence table plus paradigms: everything needed to orient a term.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub table: CooccurrenceTable,
    pub paradigms: ParadigmSets,
}

impl Lexicon {
    pub fn new(table: CooccurrenceTable, paradigms: ParadigmSets) -> Self {
        Lexicon { table, paradigms }
    }

    pub fn orientation(&self, term: &str) -> Result<f64, LexiconError> {
        Ok(self.table.semantic_orientation(&self.paradigms, term)?.value)
    }

    /// Mean SO over the document's in-vocabulary, non-stop-word tokens.
    /// `positive` if above `tau`, `negative` if below `-tau`.
    pub fn classify_mean_so(&self, doc: &Document, tau: f64) -> Result<Classification, LexiconError> {
        let mut total = 0.0;
        let mut used = 0usize;
        for token in tokenize(&doc.body) {
            if is_stop_word(&token) {
                continue;
            }
            let term = normalize_inflection(&token);
            if !self.table.contains(&term) {
                continue;
            }
            total += self.orientation(&term)?;
            used += 1;
        }
        if used == 0 {
            return Err(LexiconError::Unclassifiable(doc.id.clone()));
        }
        let score = total / used as f64;
        let label = if score > tau {
            Label::Positive
        } else if score < -tau {
            Label::Negative
        } else {
            Label::Neutral
        };
        Ok(Classification {
            label,
            score,
            terms_used: used,
        })
    }
}
