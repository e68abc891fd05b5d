//! Structured interview sessions.
//!
//! A session opens with a greeting, asks one framing question about the
//! concept, then one planned question per sub-concept in index order. Each
//! answer becomes a Likert level, either read directly (`1`..`5`) or derived
//! from an `X is Y` phrase whose `Y` is oriented through the lexicon. When
//! all questions are answered, every sub-concept name is run through the
//! concordance over the whole transcript and the session is written to the
//! TEMP file:
//!
//! ```text
//! #robopinion-session v1
//! concept=phone
//! R[1]=5
//! L[1]=q01@0: price is outrageous|||q03@1:the price battery
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::corpus::{
    concordance_with_window, normalize_inflection, tokenize, ConcordanceLine, Document,
    DEFAULT_WINDOW,
};
use crate::lexicon::Lexicon;

/// Index of the pre-zero anchor ("the interviewer thinks").
pub const PRE_ZERO_INDEX: i32 = -1;
/// Index of the zero anchor ("the concept exists").
pub const ZERO_INDEX: i32 = 0;
pub const PRE_ZERO_NAME: &str = "pre-zero";
pub const ZERO_NAME: &str = "zero";

pub const SESSION_HEADER: &str = "#robopinion-session v1";
pub const COPULAS: [&str; 6] = ["is", "are", "was", "were", "seems", "looks"];
const CITATION_SEPARATOR: &str = "|||";

#[derive(Debug, Error, PartialEq)]
pub enum InterviewError {
    #[error("concept needs an even, non-zero number of sub-concepts (got {0})")]
    OddSubConceptCount(usize),
    #[error("concept name is empty")]
    EmptyConceptName,
    #[error("sub-concept `{0}` must be a single alphanumeric token")]
    BadSubConceptName(String),
    #[error("sub-concept `{0}` appears twice after normalization")]
    DuplicateSubConcept(String),
    #[error("`{0}` is reserved for the dummy anchors")]
    ReservedName(String),
    #[error("concept file line {line}: {message}")]
    ConceptSyntax { line: usize, message: String },
    #[error("Likert level {0} is outside 1..=5")]
    LikertRange(i64),
    #[error("value {0} is outside [-1, 1]")]
    ValueRange(f64),
    #[error("session file line {line}: {message}")]
    SessionSyntax { line: usize, message: String },
    #[error("cannot read answer: {0}")]
    Answer(String),
}

/// One assessable feature of the concept, or one of the two dummy anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubConcept {
    /// 1-based for real sub-concepts; [`ZERO_INDEX`] / [`PRE_ZERO_INDEX`] for dummies.
    pub index: i32,
    pub name: String,
    /// `+1` for odd indices, `-1` for even; `0` for the dummies.
    pub sign: i8,
    pub dummy: bool,
}

impl SubConcept {
    pub fn pre_zero() -> Self {
        SubConcept {
            index: PRE_ZERO_INDEX,
            name: PRE_ZERO_NAME.into(),
            sign: 0,
            dummy: true,
        }
    }

    pub fn zero() -> Self {
        SubConcept {
            index: ZERO_INDEX,
            name: ZERO_NAME.into(),
            sign: 0,
            dummy: true,
        }
    }
}

/// Concept `C` with its ordered sub-concepts `L` and their evaluation criteria.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSpec {
    name: String,
    sub_concepts: Vec<SubConcept>,
    criteria: Vec<String>,
}

impl ConceptSpec {
    pub fn new<I, S>(name: &str, sub_names: I) -> Result<Self, InterviewError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let subs: Vec<(String, String)> = sub_names
            .into_iter()
            .map(|s| (s.as_ref().to_string(), String::new()))
            .collect();
        Self::with_criteria(name, subs)
    }

    /// `subs` pairs each sub-concept name with its evaluation criteria text.
    pub fn with_criteria(name: &str, subs: Vec<(String, String)>) -> Result<Self, InterviewError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(InterviewError::EmptyConceptName);
        }
        if subs.is_empty() || !subs.len().is_multiple_of(2) {
            return Err(InterviewError::OddSubConceptCount(subs.len()));
        }
        let mut seen = HashSet::new();
        let mut sub_concepts = Vec::with_capacity(subs.len());
        let mut criteria = Vec::with_capacity(subs.len());
        for (i, (raw, crit)) in subs.into_iter().enumerate() {
            let tokens = tokenize(&raw);
            if tokens.len() != 1 {
                return Err(InterviewError::BadSubConceptName(raw));
            }
            let folded = normalize_inflection(&tokens[0]);
            if folded == ZERO_NAME || raw.trim() == PRE_ZERO_NAME {
                return Err(InterviewError::ReservedName(raw));
            }
            if !seen.insert(folded.clone()) {
                return Err(InterviewError::DuplicateSubConcept(folded));
            }
            // the typed form is kept for display; matching always folds
            let name = tokens[0].clone();
            let index = i as i32 + 1;
            sub_concepts.push(SubConcept {
                index,
                name,
                sign: if index % 2 == 1 { 1 } else { -1 },
                dummy: false,
            });
            criteria.push(crit.trim().to_string());
        }
        Ok(ConceptSpec {
            name: name.to_string(),
            sub_concepts,
            criteria,
        })
    }

    /// Parses a concept file: `concept=<name>` then `sub=<name>[|criteria]`
    /// lines in index order. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, InterviewError> {
        let mut name = None;
        let mut subs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: &str| InterviewError::ConceptSyntax {
                line: i + 1,
                message: message.to_string(),
            };
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected key=value"))?;
            match key.trim() {
                "concept" if name.is_none() => name = Some(value.trim().to_string()),
                "concept" => return Err(syntax("concept given twice")),
                "sub" => {
                    let (sub, crit) = value.split_once('|').unwrap_or((value, ""));
                    subs.push((sub.trim().to_string(), crit.trim().to_string()));
                }
                other => return Err(syntax(&format!("unknown key `{other}`"))),
            }
        }
        let name = name.ok_or(InterviewError::EmptyConceptName)?;
        Self::with_criteria(&name, subs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Non-dummy sub-concepts, index 1..=n.
    pub fn sub_concepts(&self) -> &[SubConcept] {
        &self.sub_concepts
    }

    pub fn criteria(&self, index: i32) -> Option<&str> {
        usize::try_from(index - 1)
            .ok()
            .and_then(|i| self.criteria.get(i))
            .map(String::as_str)
    }

    /// Number of non-dummy sub-concepts.
    pub fn n(&self) -> usize {
        self.sub_concepts.len()
    }

    pub fn sub_concept(&self, index: i32) -> Option<&SubConcept> {
        usize::try_from(index - 1).ok().and_then(|i| self.sub_concepts.get(i))
    }

    /// Pre-zero, zero, then sub-concepts 1..=n.
    pub fn all_with_dummies(&self) -> Vec<SubConcept> {
        let mut all = vec![SubConcept::pre_zero(), SubConcept::zero()];
        all.extend(self.sub_concepts.iter().cloned());
        all
    }

    pub fn sub_names(&self) -> Vec<&str> {
        self.sub_concepts.iter().map(|s| s.name.as_str()).collect()
    }
}

/// Maps a 5-point Likert level linearly onto `[-1, 1]`.
pub fn likert_to_value(level: i64) -> Result<f64, InterviewError> {
    match level {
        1..=5 => Ok((level - 3) as f64 / 2.0),
        _ => Err(InterviewError::LikertRange(level)),
    }
}

/// Five-band polarity strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlumLevel {
    StrongNegative,
    Negative,
    Neutral,
    Positive,
    StrongPositive,
}

impl PlumLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            PlumLevel::StrongNegative => "strong-negative",
            PlumLevel::Negative => "negative",
            PlumLevel::Neutral => "neutral",
            PlumLevel::Positive => "positive",
            PlumLevel::StrongPositive => "strong-positive",
        }
    }
}

/// Bands split at ±0.25 and ±0.75; each boundary belongs to the band nearer zero.
pub fn plum_level(value: f64) -> Result<PlumLevel, InterviewError> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(InterviewError::ValueRange(value));
    }
    let band = match value {
        v if v < -0.75 => PlumLevel::StrongNegative,
        v if v < -0.25 => PlumLevel::Negative,
        v if v <= 0.25 => PlumLevel::Neutral,
        v if v <= 0.75 => PlumLevel::Positive,
        _ => PlumLevel::StrongPositive,
    };
    Ok(band)
}

/// Finds the first `X <copula> Y` in `sentence` whose folded `X` is one of
/// `names` (also folded). Returns the matched name as given and the raw `Y` token.
pub fn extract_copula<S: AsRef<str>>(sentence: &str, names: &[S]) -> Option<(String, String)> {
    let tokens = tokenize(sentence);
    tokens.windows(3).find_map(|w| {
        if !COPULAS.contains(&w[1].as_str()) {
            return None;
        }
        let x = normalize_inflection(&w[0]);
        names
            .iter()
            .find(|n| normalize_inflection(n.as_ref()) == x)
            .map(|n| (n.as_ref().to_string(), w[2].clone()))
    })
}

/// Maps an orientation value to a Likert level with threshold `sigma` (bits).
pub fn orientation_to_level(so: f64, sigma: f64) -> u8 {
    if so >= sigma {
        5
    } else if so > 0.0 {
        4
    } else if so == 0.0 {
        3
    } else if so > -sigma {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseSource {
    DirectAnswer,
    CopulaExtracted,
    /// Neither path produced a level; recorded as neutral and flagged.
    Unanswered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LikertResponse {
    pub sub_concept_index: i32,
    pub level: u8,
    pub source: ResponseSource,
}

impl LikertResponse {
    pub fn flagged(&self) -> bool {
        self.source == ResponseSource::Unanswered
    }

    pub fn value(&self) -> f64 {
        (self.level as f64 - 3.0) / 2.0
    }
}

/// Supplies answers to interview prompts.
pub trait AnswerSource {
    /// Answer to the concept-level framing question, if any.
    fn framing(&mut self, prompt: &str) -> Result<Option<String>, InterviewError>;
    /// Answer to a sub-concept question; `None` when the source is exhausted.
    fn answer(&mut self, prompt: &str) -> Result<Option<String>, InterviewError>;
}

/// Answers read from a script.
///
/// One answer per line, `#` comments and blank lines skipped. A line made only
/// of comma-separated integers expands into one answer per number. An optional
/// `framing=<text>` line answers the framing question.
#[derive(Debug, Clone, Default)]
pub struct ScriptedAnswers {
    framing: Option<String>,
    answers: std::collections::VecDeque<String>,
}

impl ScriptedAnswers {
    pub fn parse(text: &str) -> Self {
        let mut script = ScriptedAnswers::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(f) = line.strip_prefix("framing=") {
                script.framing = Some(f.trim().to_string());
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() > 1 && parts.iter().all(|p| p.parse::<i64>().is_ok()) {
                script.answers.extend(parts.into_iter().map(String::from));
            } else {
                script.answers.push_back(line.to_string());
            }
        }
        script
    }

    pub fn from_answers<I, S>(answers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedAnswers {
            framing: None,
            answers: answers.into_iter().map(Into::into).collect(),
        }
    }
}

impl AnswerSource for ScriptedAnswers {
    fn framing(&mut self, _prompt: &str) -> Result<Option<String>, InterviewError> {
        Ok(self.framing.take())
    }

    fn answer(&mut self, _prompt: &str) -> Result<Option<String>, InterviewError> {
        Ok(self.answers.pop_front())
    }
}

/// Interactive answers: writes each prompt, reads one line per prompt.
pub struct PromptedAnswers<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> PromptedAnswers<R, W> {
    pub fn new(input: R, output: W) -> Self {
        PromptedAnswers { input, output }
    }

    fn ask(&mut self, prompt: &str) -> Result<Option<String>, InterviewError> {
        let err = |e: std::io::Error| InterviewError::Answer(e.to_string());
        writeln!(self.output, "{prompt}").map_err(err)?;
        write!(self.output, "> ").map_err(err)?;
        self.output.flush().map_err(err)?;
        let mut line = String::new();
        if self.input.read_line(&mut line).map_err(err)? == 0 {
            return Ok(None);
        }
        Ok(Some(line.trim_end_matches(['\r', '\n']).to_string()))
    }
}

impl<R: BufRead, W: Write> AnswerSource for PromptedAnswers<R, W> {
    fn framing(&mut self, prompt: &str) -> Result<Option<String>, InterviewError> {
        self.ask(prompt)
    }

    fn answer(&mut self, prompt: &str) -> Result<Option<String>, InterviewError> {
        self.ask(prompt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    /// Orientation (bits) at or beyond which a copula answer maps to 1 or 5.
    pub sigma: f64,
    /// Concordance context window.
    pub window: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            sigma: 1.0,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub doc_id: String,
    pub question: String,
    pub answer: String,
}

/// Everything one interview produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub concept: ConceptSpec,
    /// One response per non-dummy sub-concept, in index order.
    pub responses: Vec<LikertResponse>,
    pub citations: BTreeMap<i32, Vec<ConcordanceLine>>,
    /// Framing answer first, then one entry per sub-concept.
    pub transcript: Vec<TranscriptEntry>,
}

impl SessionRecord {
    pub fn to_file(&self) -> SessionFile {
        SessionFile {
            concept: self.concept.name().to_string(),
            entries: self
                .responses
                .iter()
                .map(|r| SessionEntry {
                    index: r.sub_concept_index,
                    level: r.level,
                    citations: self.citations.get(&r.sub_concept_index).cloned().unwrap_or_default(),
                })
                .collect(),
        }
    }

    pub fn flagged(&self) -> Vec<i32> {
        self.responses
            .iter()
            .filter(|r| r.flagged())
            .map(|r| r.sub_concept_index)
            .collect()
    }
}

fn question_for(spec: &ConceptSpec, sub: &SubConcept) -> String {
    let mut q = format!("Q{}. How do you assess the {} of {}?", sub.index, sub.name, spec.name());
    if let Some(c) = spec.criteria(sub.index).filter(|c| !c.is_empty()) {
        let _ = write!(q, " ({c})");
    }
    q.push_str(" Answer 1-5 or in words.");
    q
}

fn assess(
    answer: &str,
    sub: &SubConcept,
    lexicon: Option<&Lexicon>,
    sigma: f64,
) -> (u8, ResponseSource) {
    if let Ok(level) = answer.trim().parse::<i64>() {
        if (1..=5).contains(&level) {
            return (level as u8, ResponseSource::DirectAnswer);
        }
    }
    let oriented = lexicon.and_then(|lex| {
        let (_, y) = extract_copula(answer, &[sub.name.as_str()])?;
        lex.orientation(&normalize_inflection(&y)).ok()
    });
    match oriented {
        Some(so) => (orientation_to_level(so, sigma), ResponseSource::CopulaExtracted),
        None => (3, ResponseSource::Unanswered),
    }
}

/// Runs one session. Given a scripted source the result depends only on
/// `(spec, script, lexicon, config)`.
pub fn run_session(
    spec: &ConceptSpec,
    source: &mut dyn AnswerSource,
    lexicon: Option<&Lexicon>,
    config: &SessionConfig,
) -> Result<SessionRecord, InterviewError> {
    let width = spec.n().to_string().len().max(2);
    let doc_id = |i: usize| format!("q{i:0width$}");

    let mut transcript = Vec::with_capacity(spec.n() + 1);
    let framing_q = format!(
        "Welcome. This session collects your opinion about {}. What is your overall impression?",
        spec.name()
    );
    let framing = source.framing(&framing_q)?.unwrap_or_default();
    transcript.push(TranscriptEntry {
        doc_id: doc_id(0),
        question: framing_q,
        answer: framing,
    });

    let mut responses = Vec::with_capacity(spec.n());
    for sub in spec.sub_concepts() {
        let question = question_for(spec, sub);
        let answer = source.answer(&question)?.unwrap_or_default();
        let (level, source_kind) = assess(&answer, sub, lexicon, config.sigma);
        responses.push(LikertResponse {
            sub_concept_index: sub.index,
            level,
            source: source_kind,
        });
        transcript.push(TranscriptEntry {
            doc_id: doc_id(sub.index as usize),
            question,
            answer,
        });
    }

    let docs: Vec<Document> = transcript
        .iter()
        .map(|e| Document::plain(e.doc_id.clone(), e.answer.clone()))
        .collect();
    let mut citations = BTreeMap::new();
    for sub in spec.sub_concepts() {
        let lines = concordance_with_window(&sub.name, &docs, config.window)
            .expect("sub-concept names are non-empty tokens");
        citations.insert(sub.index, lines);
    }

    Ok(SessionRecord {
        concept: spec.clone(),
        responses,
        citations,
        transcript,
    })
}

/// The persisted view of a session: what the TEMP file holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionFile {
    pub concept: String,
    pub entries: Vec<SessionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionEntry {
    pub index: i32,
    pub level: u8,
    pub citations: Vec<ConcordanceLine>,
}

impl SessionFile {
    /// Responses as read back from disk; the original source is not stored.
    pub fn responses(&self) -> Vec<LikertResponse> {
        self.entries
            .iter()
            .map(|e| LikertResponse {
                sub_concept_index: e.index,
                level: e.level,
                source: ResponseSource::DirectAnswer,
            })
            .collect()
    }
}

fn format_citation(line: &ConcordanceLine) -> String {
    format!(
        "{}@{}:{} {} {}",
        line.doc_id,
        line.token_offset,
        line.left_context.join(" "),
        line.hit,
        line.right_context.join(" ")
    )
}

pub fn write_session(record: &SessionRecord) -> String {
    write_session_file(&record.to_file())
}

pub fn write_session_file(file: &SessionFile) -> String {
    let mut out = format!("{SESSION_HEADER}\nconcept={}\n", file.concept);
    for e in &file.entries {
        let cites: Vec<String> = e.citations.iter().map(format_citation).collect();
        let _ = writeln!(out, "R[{}]={}", e.index, e.level);
        let _ = writeln!(out, "L[{}]={}", e.index, cites.join(CITATION_SEPARATOR));
    }
    out
}

pub fn parse_session(text: &str) -> Result<SessionFile, InterviewError> {
    parse_session_with_window(text, DEFAULT_WINDOW)
}

fn parse_indexed(line: &str, tag: char) -> Option<(i32, &str)> {
    let rest = line.strip_prefix(tag)?.strip_prefix('[')?;
    let (index, rest) = rest.split_once("]=")?;
    Some((index.parse().ok()?, rest))
}

fn parse_citation(text: &str, window: usize) -> Option<ConcordanceLine> {
    let (head, context) = text.split_once(':')?;
    let (doc_id, offset) = head.rsplit_once('@')?;
    let token_offset: usize = offset.parse().ok()?;
    // left context length is implied by the offset: min(offset, window)
    let left_len = token_offset.min(window);
    let (left, rest) = if left_len == 0 {
        (Vec::new(), context.strip_prefix(' ')?)
    } else {
        let parts: Vec<&str> = context.splitn(left_len + 1, ' ').collect();
        if parts.len() != left_len + 1 {
            return None;
        }
        (parts[..left_len].to_vec(), parts[left_len])
    };
    let (hit, right) = rest.split_once(' ')?;
    let right: Vec<&str> = if right.is_empty() { Vec::new() } else { right.split(' ').collect() };
    let tokens_ok = left.iter().chain(right.iter()).chain([&hit]).all(|t| !t.is_empty());
    if !tokens_ok || doc_id.is_empty() {
        return None;
    }
    let owned = |v: Vec<&str>| v.into_iter().map(String::from).collect();
    Some(ConcordanceLine {
        doc_id: doc_id.to_string(),
        hit: hit.to_string(),
        left_context: owned(left),
        right_context: owned(right),
        token_offset,
    })
}

/// Parses a TEMP session file; `window` is the concordance window the file
/// was written with.
pub fn parse_session_with_window(text: &str, window: usize) -> Result<SessionFile, InterviewError> {
    let err = |line: usize, message: &str| InterviewError::SessionSyntax {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, SESSION_HEADER)) => {}
        _ => return Err(err(1, "missing `#robopinion-session v1` header")),
    }
    let concept = match lines.next() {
        Some((_, l)) if l.starts_with("concept=") => l["concept=".len()..].to_string(),
        Some((n, _)) => return Err(err(n, "expected `concept=<name>`")),
        None => return Err(err(2, "missing concept line")),
    };

    let mut entries = Vec::new();
    while let Some((n, line)) = lines.next() {
        let (index, level) = parse_indexed(line, 'R').ok_or_else(|| err(n, "expected `R[i]=level`"))?;
        let level: u8 = level
            .parse()
            .ok()
            .filter(|l| (1..=5).contains(l))
            .ok_or_else(|| err(n, "Likert level must be 1..5"))?;
        let (n, line) = lines.next().ok_or_else(|| err(n + 1, "missing `L[i]=` line"))?;
        let (l_index, cites) = parse_indexed(line, 'L').ok_or_else(|| err(n, "expected `L[i]=citations`"))?;
        if l_index != index {
            return Err(err(n, "citation index does not match response index"));
        }
        let citations = if cites.is_empty() {
            Vec::new()
        } else {
            cites
                .split(CITATION_SEPARATOR)
                .map(|c| parse_citation(c, window).ok_or_else(|| err(n, &format!("malformed citation `{c}`"))))
                .collect::<Result<_, _>>()?
        };
        entries.push(SessionEntry {
            index,
            level,
            citations,
        });
    }
    Ok(SessionFile { concept, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{ContextMode, CooccurrenceTable, ParadigmSets};

    fn phone() -> ConceptSpec {
        ConceptSpec::new(
            "phone",
            ["price", "weight", "battery", "screen", "camera", "speaker", "design", "storage", "signal", "support"],
        )
        .unwrap()
    }

    fn lexicon() -> Lexicon {
        let bodies = [
            "the price is outrageous and bad",
            "outrageous poor service",
            "outrageous wrong bill",
            "a good and nice phone",
            "excellent sturdy build",
            "sturdy good case",
            "bad battery",
            "good screen",
        ];
        let docs: Vec<Document> = bodies
            .iter()
            .enumerate()
            .map(|(i, b)| Document::plain(format!("c{i}"), *b))
            .collect();
        let table = CooccurrenceTable::build(&docs, ContextMode::Document).unwrap();
        Lexicon::new(table, ParadigmSets::default())
    }

    #[test]
    fn concept_constraints() {
        assert_eq!(phone().n(), 10);
        assert_eq!(
            ConceptSpec::new("c", ["a1", "b1", "c1"]),
            Err(InterviewError::OddSubConceptCount(3))
        );
        assert_eq!(ConceptSpec::new("c", Vec::<&str>::new()), Err(InterviewError::OddSubConceptCount(0)));
        assert!(matches!(
            ConceptSpec::new("c", ["price", "prices"]),
            Err(InterviewError::DuplicateSubConcept(_))
        ));
        assert!(matches!(ConceptSpec::new("c", ["zero", "x1"]), Err(InterviewError::ReservedName(_))));
        assert!(matches!(
            ConceptSpec::new("c", ["battery life", "x1"]),
            Err(InterviewError::BadSubConceptName(_))
        ));
        let spec = phone();
        let signs: Vec<i8> = spec.sub_concepts().iter().map(|s| s.sign).collect();
        assert_eq!(signs, [1, -1, 1, -1, 1, -1, 1, -1, 1, -1]);
        let all = spec.all_with_dummies();
        assert_eq!(all.len(), 12);
        assert_eq!(all.iter().filter(|s| s.dummy).count(), 2);
    }

    #[test]
    fn concept_file() {
        let text = "# phone\nconcept=phone\nsub=Prices|fair for money?\nsub=weight\nsub=speed\nsub=heat\n";
        let spec = ConceptSpec::parse(text).unwrap();
        assert_eq!(spec.sub_names(), ["prices", "weight", "speed", "heat"]);
        assert_eq!(extract_copula("the price is fair", &spec.sub_names()), Some(("prices".into(), "fair".into())));
        assert_eq!(extract_copula("speed was great", &spec.sub_names()), Some(("speed".into(), "great".into())));
        assert!(matches!(
            ConceptSpec::parse("concept=x\nsub=price\nsub=prices\n"),
            Err(InterviewError::DuplicateSubConcept(_))
        ));
        assert_eq!(spec.criteria(1), Some("fair for money?"));
        assert!(matches!(
            ConceptSpec::parse("concept=x\nfoo=bar\n"),
            Err(InterviewError::ConceptSyntax { line: 2, .. })
        ));
    }

    #[test]
    fn likert_mapping() {
        assert_eq!(likert_to_value(3).unwrap(), 0.0);
        assert_eq!(likert_to_value(1).unwrap(), -1.0);
        assert_eq!(likert_to_value(5).unwrap(), 1.0);
        assert_eq!(likert_to_value(2).unwrap(), -0.5);
        for l in 1..=5 {
            assert_eq!(likert_to_value(l).unwrap(), -likert_to_value(6 - l).unwrap());
        }
        assert_eq!(likert_to_value(0), Err(InterviewError::LikertRange(0)));
        assert_eq!(likert_to_value(6), Err(InterviewError::LikertRange(6)));
    }

    #[test]
    fn plum_bands() {
        assert_eq!(plum_level(0.0).unwrap(), PlumLevel::Neutral);
        assert_eq!(plum_level(1.0).unwrap(), PlumLevel::StrongPositive);
        assert_eq!(plum_level(-1.0).unwrap(), PlumLevel::StrongNegative);
        assert_eq!(plum_level(-0.5).unwrap(), PlumLevel::Negative);
        assert_eq!(plum_level(0.25).unwrap(), PlumLevel::Neutral);
        assert_eq!(plum_level(-0.25).unwrap(), PlumLevel::Neutral);
        assert_eq!(plum_level(0.75).unwrap(), PlumLevel::Positive);
        assert_eq!(plum_level(-0.75).unwrap(), PlumLevel::Negative);
        assert!(plum_level(1.01).is_err());
        assert!(plum_level(f64::NAN).is_err());
    }

    #[test]
    fn plum_monotone_on_grid() {
        let mut last = PlumLevel::StrongNegative;
        for i in 0..=20_000 {
            let v = -1.0 + i as f64 / 10_000.0;
            let band = plum_level(v.min(1.0)).unwrap();
            assert!(band >= last, "at {v}");
            last = band;
        }
    }

    #[test]
    fn copula_extraction() {
        assert_eq!(
            extract_copula("price is outrageous", &["price"]),
            Some(("price".into(), "outrageous".into()))
        );
        assert_eq!(extract_copula("weather is nice", &["price"]), None);
        assert_eq!(
            extract_copula("prices are high", &["price"]),
            Some(("price".into(), "high".into()))
        );
        assert_eq!(
            extract_copula("Honestly the weight seems light, price is high", &["price", "weight"]),
            Some(("weight".into(), "light".into()))
        );
        assert_eq!(extract_copula("price", &["price"]), None);
    }

    #[test]
    fn orientation_levels() {
        assert_eq!(orientation_to_level(2.0, 1.0), 5);
        assert_eq!(orientation_to_level(1.0, 1.0), 5);
        assert_eq!(orientation_to_level(0.5, 1.0), 4);
        assert_eq!(orientation_to_level(0.0, 1.0), 3);
        assert_eq!(orientation_to_level(-0.5, 1.0), 2);
        assert_eq!(orientation_to_level(-1.0, 1.0), 1);
    }

    #[test]
    fn scripted_numeric_session() {
        let spec = phone();
        let mut script = ScriptedAnswers::parse("5,1,5,1,5,1,5,1,5,1\n");
        let record = run_session(&spec, &mut script, None, &SessionConfig::default()).unwrap();
        let levels: Vec<u8> = record.responses.iter().map(|r| r.level).collect();
        assert_eq!(levels, [5, 1, 5, 1, 5, 1, 5, 1, 5, 1]);
        assert!(record.responses.iter().all(|r| r.source == ResponseSource::DirectAnswer));
        assert_eq!(record.transcript.len(), 11);
    }

    #[test]
    fn copula_session() {
        let spec = phone();
        let lex = lexicon();
        let mut answers = vec!["price is outrageous".to_string(), "weight is sturdy".into()];
        answers.extend(std::iter::repeat("3".to_string()).take(8));
        let mut script = ScriptedAnswers::from_answers(answers);
        let record = run_session(&spec, &mut script, Some(&lex), &SessionConfig::default()).unwrap();
        let price = &record.responses[0];
        assert_eq!(price.source, ResponseSource::CopulaExtracted);
        assert!(price.level < 3, "outrageous should read negative, got {}", price.level);
        assert_eq!(record.responses[1].source, ResponseSource::CopulaExtracted);
        assert!(record.responses[1].level > 3);
        assert_eq!(record.citations[&1].len(), 1);
        assert_eq!(record.citations[&1][0].doc_id, "q01");
    }

    #[test]
    fn unanswerable_is_flagged_neutral() {
        let spec = ConceptSpec::new("phone", ["price", "weight"]).unwrap();
        let mut script = ScriptedAnswers::from_answers(["no idea"]);
        let record = run_session(&spec, &mut script, Some(&lexicon()), &SessionConfig::default()).unwrap();
        assert_eq!(record.responses[0].level, 3);
        assert!(record.responses[0].flagged());
        // script exhausted for the second question
        assert!(record.responses[1].flagged());
        assert_eq!(record.flagged(), [1, 2]);
    }

    #[test]
    fn interactive_answers() {
        let spec = ConceptSpec::new("phone", ["price", "weight"]).unwrap();
        let input = b"looks fine\n4\n2\n" as &[u8];
        let mut out = Vec::new();
        let mut src = PromptedAnswers::new(input, &mut out);
        let record = run_session(&spec, &mut src, None, &SessionConfig::default()).unwrap();
        assert_eq!(record.transcript[0].answer, "looks fine");
        assert_eq!(record.responses[0].level, 4);
        assert_eq!(record.responses[1].level, 2);
        let shown = String::from_utf8(out).unwrap();
        assert!(shown.contains("Q1. How do you assess the price of phone?"));
    }

    #[test]
    fn session_file_format() {
        let spec = ConceptSpec::new("phone", ["price", "weight", "battery", "screen"]).unwrap();
        let mut script = ScriptedAnswers::parse(
            "framing=great price but the prices of cases hurt\n5\nweight is fine\n2\n4\n",
        );
        let record = run_session(&spec, &mut script, None, &SessionConfig::default()).unwrap();
        let text = write_session(&record);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SESSION_HEADER);
        assert_eq!(lines[1], "concept=phone");
        assert_eq!(lines[2], "R[1]=5");
        assert_eq!(lines[3], "L[1]=q00@1:great price but the prices of cases|||q00@4:great price but the price of cases hurt");
        assert_eq!(lines[6], "R[3]=2");
        assert_eq!(lines[7], "L[3]=");

        let parsed = parse_session(&text).unwrap();
        assert_eq!(parsed, record.to_file());
        assert_eq!(write_session_file(&parsed), text);
        assert_eq!(parsed.entries[0].citations.len(), 2);
    }

    #[test]
    fn citation_edges_round_trip() {
        let file = SessionFile {
            concept: "c".into(),
            entries: vec![SessionEntry {
                index: 1,
                level: 4,
                citations: vec![
                    ConcordanceLine {
                        doc_id: "q01".into(),
                        hit: "price".into(),
                        left_context: vec![],
                        right_context: vec![],
                        token_offset: 0,
                    },
                    ConcordanceLine {
                        doc_id: "q02".into(),
                        hit: "price".into(),
                        left_context: vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
                        right_context: vec!["f".into()],
                        token_offset: 9,
                    },
                ],
            }],
        };
        let text = write_session_file(&file);
        assert!(text.contains("L[1]=q01@0: price |||q02@9:a b c d e price f"));
        assert_eq!(parse_session(&text).unwrap(), file);
    }

    #[test]
    fn malformed_session_lines() {
        let bad = "#robopinion-session v1\nconcept=x\nR[1]=9\nL[1]=\n";
        assert!(matches!(parse_session(bad), Err(InterviewError::SessionSyntax { line: 3, .. })));
        let bad = "#robopinion-session v1\nconcept=x\nR[1]=4\nL[2]=\n";
        assert!(matches!(parse_session(bad), Err(InterviewError::SessionSyntax { line: 4, .. })));
        let bad = "#robopinion-session v1\nconcept=x\nR[1]=4\nL[1]=nonsense\n";
        assert!(matches!(parse_session(bad), Err(InterviewError::SessionSyntax { line: 4, .. })));
        assert!(matches!(parse_session("concept=x\n"), Err(InterviewError::SessionSyntax { line: 1, .. })));
    }

    #[test]
    fn session_is_deterministic() {
        let spec = phone();
        let lex = lexicon();
        let text = "framing=pricey\nprice is outrageous\n1\n5\n2\n4\n3\n5\n1\n2\n4\n";
        let a = run_session(&spec, &mut ScriptedAnswers::parse(text), Some(&lex), &SessionConfig::default())
            .unwrap();
        let b = run_session(&spec, &mut ScriptedAnswers::parse(text), Some(&lex), &SessionConfig::default())
            .unwrap();
        assert_eq!(write_session(&a), write_session(&b));
        assert_eq!(a, b);
    }
}
