//! Interview, landscape, simulation and scoring wired end to end.

use std::path::{Path, PathBuf};

use nalgebra::Vector2;

use crate::config::{ConfigError, PipelineConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::interview::{
    run_session, write_session, AnswerSource, ConceptSpec, LikertResponse, ScriptedAnswers,
    SessionConfig, SessionRecord,
};
use crate::landscape::{opinion_offsets, place_observed_features, GroundTruthMap, OpinionOffset};
use crate::lexicon::{CooccurrenceTable, Lexicon, ParadigmSets};
use crate::polarity::{aberrations, score_profile, AberrationProfile, PolarityResult};
use crate::slam::{simulate_run, RunResult};
use crate::svg::{render_svg, Figure};

pub const SESSION_FILE: &str = "session.txt";
pub const MAP_FILE: &str = "map.csv";
pub const TRAIL_FILE: &str = "trail.csv";
pub const ASSOCIATIONS_FILE: &str = "associations.csv";
pub const FINAL_MAP_FILE: &str = "final_map.csv";
pub const ABERRATION_FILE: &str = "aberration.csv";
pub const RESULT_FILE: &str = "result.csv";
pub const FIGURE_FILE: &str = "figure.svg";

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_concept(config: &PipelineConfig) -> Result<ConceptSpec> {
    Ok(ConceptSpec::parse(&read(config.concept_path()?)?)?)
}

pub fn load_paradigms(config: &PipelineConfig) -> Result<ParadigmSets> {
    match &config.paradigms {
        Some(p) => Ok(ParadigmSets::parse(&read(p)?)?),
        None => Ok(ParadigmSets::default()),
    }
}

/// Lexicon over the configured corpus, or `None` when no corpus is set.
pub fn load_lexicon(config: &PipelineConfig) -> Result<Option<Lexicon>> {
    let Some(dir) = &config.corpus else {
        return Ok(None);
    };
    let corpus = Corpus::load_dir(dir)?;
    let table = CooccurrenceTable::build(corpus.docs(), config.context)?.with_smoothing(config.smoothing)?;
    Ok(Some(Lexicon::new(table, load_paradigms(config)?)))
}

pub fn session_config(config: &PipelineConfig) -> SessionConfig {
    SessionConfig {
        sigma: config.sigma,
        window: config.window,
    }
}

/// Runs the interview from `source`, or from the configured script.
pub fn interview(
    config: &PipelineConfig,
    spec: &ConceptSpec,
    lexicon: Option<&Lexicon>,
    source: Option<&mut dyn AnswerSource>,
) -> Result<SessionRecord> {
    let session = session_config(config);
    match source {
        Some(src) => Ok(run_session(spec, src, lexicon, &session)?),
        None => {
            let path = config.script.as_deref().ok_or(ConfigError::Missing("script"))?;
            let mut script = ScriptedAnswers::parse(&read(path)?);
            Ok(run_session(spec, &mut script, lexicon, &session)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub ground_truth: GroundTruthMap,
    pub offsets: Vec<OpinionOffset>,
    /// Opinion-shifted positions in landmark order.
    pub observed: Vec<Vector2<f64>>,
}

pub fn build_landscape(config: &PipelineConfig, spec: &ConceptSpec, responses: &[LikertResponse]) -> Result<Landscape> {
    let ground_truth = GroundTruthMap::build(spec, config.side, None)?;
    let offsets = opinion_offsets(spec, responses, config.amplitude())?;
    let observed = place_observed_features(&ground_truth, &offsets)?;
    Ok(Landscape {
        ground_truth,
        offsets,
        observed,
    })
}

pub fn simulate(config: &PipelineConfig, landscape: &Landscape) -> Result<RunResult> {
    Ok(simulate_run(&landscape.ground_truth, &landscape.observed, config.sim_config())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    /// Aberrations after noise-floor suppression.
    pub raw: AberrationProfile,
    pub normalized: Option<AberrationProfile>,
    pub result: PolarityResult,
}

impl Scored {
    pub fn degenerate(&self) -> bool {
        self.normalized.is_none()
    }

    pub fn profile(&self) -> &AberrationProfile {
        self.normalized.as_ref().unwrap_or(&self.raw)
    }
}

pub fn score_run(config: &PipelineConfig, run: &RunResult, gt: &GroundTruthMap) -> Result<Scored> {
    let raw = aberrations(run, gt)?.suppress_below(config.noise_floor);
    let result = score_profile(&raw, config.epsilon)?;
    let normalized = match result {
        Some(_) => Some(raw.normalize()?),
        None => None,
    };
    Ok(Scored {
        raw,
        normalized,
        result: result.unwrap_or_else(PolarityResult::neutral),
    })
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub session: SessionRecord,
    pub landscape: Landscape,
    pub run: RunResult,
    pub scored: Scored,
    pub artifacts: Vec<PathBuf>,
}

/// Writes every file or none: on the first failure the files already
/// written are removed.
pub fn write_artifacts(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, body) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            let _ = std::fs::remove_file(&path);
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}

pub fn figure<'a>(landscape: &'a Landscape, run: &'a RunResult, scored: &'a Scored, title: String) -> Figure<'a> {
    let slots = run.feature_slots();
    let estimated = landscape
        .ground_truth
        .landmarks()
        .iter()
        .filter_map(|l| Some((l.index, run.final_state.landmark(*slots.get(&l.index)?)?)))
        .collect();
    Figure {
        trail: &run.trail,
        ground_truth: landscape.ground_truth.landmarks(),
        estimated,
        profile: scored.profile(),
        title,
    }
}

/// interview, landscape, simulation, polarity, then artifacts in `config.out`.
pub fn run_pipeline(config: &PipelineConfig, source: Option<&mut dyn AnswerSource>) -> Result<PipelineOutcome> {
    config.validate()?;
    let spec = load_concept(config)?;
    let lexicon = load_lexicon(config)?;
    let session = interview(config, &spec, lexicon.as_ref(), source)?;
    let landscape = build_landscape(config, &spec, &session.responses)?;
    let run = simulate(config, &landscape)?;
    let scored = score_run(config, &run, &landscape.ground_truth)?;

    let title = format!("{}: score {:.3}", spec.name(), scored.result.score);
    let svg = render_svg(&figure(&landscape, &run, &scored, title));
    let files = [
        (SESSION_FILE, write_session(&session)),
        (MAP_FILE, landscape.ground_truth.to_csv()),
        (TRAIL_FILE, run.trail_csv()),
        (ASSOCIATIONS_FILE, run.associations_csv()),
        (FINAL_MAP_FILE, run.final_map_csv(&landscape.ground_truth)),
        (ABERRATION_FILE, scored.profile().to_csv()),
        (RESULT_FILE, scored.result.to_csv()),
        (FIGURE_FILE, svg),
    ];
    let artifacts = write_artifacts(&config.out, &files)?;
    Ok(PipelineOutcome {
        session,
        landscape,
        run,
        scored,
        artifacts,
    })
}
