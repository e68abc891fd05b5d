//! Opinion documents, tokenization, inflection folding and keyword-in-context
//! concordance.
//!
//! Documents use the debate-post layout: an id line, a header line of
//! space-separated `#key=value` pairs, then the body.
//!
//! ```text
//! post_209
//! #stance=stance2 #originalStanceText=No #originalTopic=is-there-a-god
//! Exactly
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Default number of context tokens kept on each side of a concordance hit.
pub const DEFAULT_WINDOW: usize = 5;

const MIN_STEM: usize = 3;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("post is missing its id line")]
    MissingId,
    #[error("post `{id}` is missing its header line")]
    MissingHeader { id: String },
    #[error("malformed header token `{token}` (expected #key=value)")]
    MalformedHeader { token: String },
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("empty concordance term")]
    EmptyTerm,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<CorpusError>,
    },
}

/// One opinion document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub id: String,
    pub stance: Option<String>,
    pub original_stance_text: Option<String>,
    pub topic: Option<String>,
    /// Header pairs other than the three known keys, in file order.
    pub extra: Vec<(String, String)>,
    pub body: String,
}

impl Document {
    /// A document with no header metadata.
    pub fn plain(id: impl Into<String>, body: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            body: body.into(),
            ..Default::default()
        }
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.body)
    }
}

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn strip_rule(token: &str) -> Option<&str> {
    let stem_ok = |stem: &str| stem.chars().count() >= MIN_STEM;
    if let Some(stem) = token.strip_suffix("es") {
        let sibilant = ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s));
        if sibilant && stem_ok(stem) {
            return Some(stem);
        }
    }
    if let Some(stem) = token.strip_suffix('s') {
        let protected = ["ss", "us", "is"].iter().any(|s| token.ends_with(s));
        if !protected && stem_ok(stem) {
            return Some(stem);
        }
    }
    if let Some(stem) = token.strip_suffix("ed") {
        if stem_ok(stem) {
            return Some(stem);
        }
    }
    if let Some(stem) = token.strip_suffix("ing") {
        if stem_ok(stem) {
            return Some(stem);
        }
    }
    None
}

/// Folds an inflected token onto its canonical stem.
///
/// Rules, first match wins, repeated until none applies:
/// `-es` after a sibilant (`s x z ch sh`), `-s` (not after `s`, `u` or `i`),
/// `-ed`, `-ing`. A rule only fires when at least three characters remain.
/// Iterating to the fixed point makes the function idempotent.
pub fn normalize_inflection(token: &str) -> String {
    let mut current = token;
    while let Some(stem) = strip_rule(current) {
        current = stem;
    }
    current.to_string()
}

/// One keyword-in-context citation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcordanceLine {
    pub doc_id: String,
    /// Normalized form of the matched token.
    pub hit: String,
    pub left_context: Vec<String>,
    pub right_context: Vec<String>,
    pub token_offset: usize,
}

impl ConcordanceLine {
    pub fn to_tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.doc_id,
            self.token_offset,
            self.left_context.join(" "),
            self.hit,
            self.right_context.join(" ")
        )
    }
}

/// Concordance with the default five-token window.
pub fn concordance(term: &str, docs: &[Document]) -> Result<Vec<ConcordanceLine>, CorpusError> {
    concordance_with_window(term, docs, DEFAULT_WINDOW)
}

/// Every occurrence of a token whose normalized form equals the normalized
/// `term`, ordered by `(doc_id, token_offset)`.
pub fn concordance_with_window(
    term: &str,
    docs: &[Document],
    window: usize,
) -> Result<Vec<ConcordanceLine>, CorpusError> {
    let query = tokenize(term);
    let query = match query.as_slice() {
        [] => return Err(CorpusError::EmptyTerm),
        [single] => normalize_inflection(single),
        _ => normalize_inflection(&term.trim().to_lowercase()),
    };

    let mut ordered: Vec<&Document> = docs.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));

    let mut lines = Vec::new();
    for doc in ordered {
        let tokens = doc.tokens();
        for (offset, token) in tokens.iter().enumerate() {
            if normalize_inflection(token) != query {
                continue;
            }
            let left_start = offset.saturating_sub(window);
            let right_end = (offset + 1 + window).min(tokens.len());
            lines.push(ConcordanceLine {
                doc_id: doc.id.clone(),
                hit: query.clone(),
                left_context: tokens[left_start..offset].to_vec(),
                right_context: tokens[offset + 1..right_end].to_vec(),
                token_offset: offset,
            });
        }
    }
    Ok(lines)
}

/// Tab-separated concordance export with a header row.
pub fn concordance_tsv(lines: &[ConcordanceLine]) -> String {
    let mut out = String::from("doc_id\toffset\tleft\thit\tright\n");
    for line in lines {
        out.push_str(&line.to_tsv_row());
        out.push('\n');
    }
    out
}

/// Parses one debate post. A single trailing LF is not part of the body.
pub fn parse_post(raw: &str) -> Result<Document, CorpusError> {
    let raw = raw.strip_suffix('\n').unwrap_or(raw);
    let (id, rest) = match raw.split_once('\n') {
        Some((id, rest)) => (id, Some(rest)),
        None => (raw, None),
    };
    if id.is_empty() {
        return Err(CorpusError::MissingId);
    }
    let rest = rest.ok_or_else(|| CorpusError::MissingHeader { id: id.to_string() })?;
    let (header, body) = rest.split_once('\n').unwrap_or((rest, ""));

    let mut doc = Document {
        id: id.to_string(),
        body: body.to_string(),
        ..Default::default()
    };
    for token in header.split(' ').filter(|t| !t.is_empty()) {
        let pair = token.strip_prefix('#').and_then(|kv| kv.split_once('='));
        let Some((key, value)) = pair else {
            return Err(CorpusError::MalformedHeader {
                token: token.to_string(),
            });
        };
        match key {
            "stance" => doc.stance = Some(value.to_string()),
            "originalStanceText" => doc.original_stance_text = Some(value.to_string()),
            "originalTopic" => doc.topic = Some(value.to_string()),
            _ => doc.extra.push((key.to_string(), value.to_string())),
        }
    }
    Ok(doc)
}

/// Inverse of [`parse_post`]; known keys are written first, then the extras.
pub fn serialize_post(doc: &Document) -> String {
    let mut header = Vec::new();
    if let Some(v) = &doc.stance {
        header.push(format!("#stance={v}"));
    }
    if let Some(v) = &doc.original_stance_text {
        header.push(format!("#originalStanceText={v}"));
    }
    if let Some(v) = &doc.topic {
        header.push(format!("#originalTopic={v}"));
    }
    for (k, v) in &doc.extra {
        header.push(format!("#{k}={v}"));
    }
    let mut out = String::new();
    let _ = write!(out, "{}\n{}\n{}\n", doc.id, header.join(" "), doc.body);
    out
}

/// Splits a file holding one or more posts separated by blank lines.
pub fn parse_posts(text: &str) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    let mut chunk = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !chunk.is_empty() {
                docs.push(parse_post(&chunk)?);
                chunk.clear();
            }
        } else {
            chunk.push_str(line);
            chunk.push('\n');
        }
    }
    if !chunk.is_empty() {
        docs.push(parse_post(&chunk)?);
    }
    Ok(docs)
}

/// An immutable collection of documents with unique, non-empty ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for doc in &docs {
            if doc.id.is_empty() {
                return Err(CorpusError::MissingId);
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(CorpusError::DuplicateId(doc.id.clone()));
            }
        }
        Ok(Corpus { docs })
    }

    /// Loads every regular file in `dir` (sorted by file name).
    pub fn load_dir(dir: &Path) -> Result<Self, CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(io_err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        let mut docs = Vec::new();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let parsed = parse_posts(&text).map_err(|e| CorpusError::InFile {
                path: path.display().to_string(),
                source: Box::new(e),
            })?;
            docs.extend(parsed);
        }
        Corpus::new(docs)
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Normalized token frequency over the whole corpus.
    pub fn vocabulary(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for doc in &self.docs {
            for t in doc.tokens() {
                *counts.entry(normalize_inflection(&t)).or_insert(0) += 1;
            }
        }
        counts
    }
}
