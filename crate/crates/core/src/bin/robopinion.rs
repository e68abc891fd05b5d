use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use robopinion::config::PipelineConfig;
use robopinion::corpus::{concordance_tsv, concordance_with_window, Corpus};
use robopinion::error::{Error, EXIT_OK, EXIT_VALIDATION};
use robopinion::interview::{parse_session_with_window, write_session, PromptedAnswers};
use robopinion::lexicon::{ContextMode, CooccurrenceTable, ParadigmSets};
use robopinion::montecarlo::{compare_associators, summary_csv};
use robopinion::pipeline::{self, write_artifacts};
use robopinion::polarity::{score_profile, AberrationProfile, PolarityResult};

#[derive(Parser)]
#[command(name = "robopinion", version, about = "Opinion polarity from interview sessions via SLAM-style landscape navigation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Co-occurrence lexicon tools.
    Lexicon {
        #[command(subcommand)]
        action: LexiconCommand,
    },
    /// Keyword-in-context listing of a term over a corpus (TSV).
    Concord {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        term: String,
        /// Context tokens on each side.
        #[arg(long, default_value_t = robopinion::corpus::DEFAULT_WINDOW)]
        window: usize,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run an interview session (scripted, or interactive on stdin) and write `<out>/session.txt`.
    Interview(Knobs),
    /// Simulate a run from a saved session; writes map, trail, association and final-map CSVs.
    Simulate {
        /// Session file produced by `interview`.
        #[arg(long)]
        session: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Polarity score of an aberration CSV (`index,name,value`).
    Score {
        #[arg(long)]
        aberrations: PathBuf,
        /// Neutral half-band, in [0, 0.5).
        #[arg(long, default_value_t = robopinion::polarity::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Full run: interview, landscape, simulation, polarity, artifacts.
    Pipeline(Knobs),
    /// NN against JCBB over seeded Monte Carlo runs (CSV table).
    CompareAssoc {
        #[arg(long, default_value_t = 100)]
        runs: usize,
        /// Observation-noise multipliers, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 25.0])]
        r_factors: Vec<f64>,
        #[command(flatten)]
        knobs: Knobs,
    },
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Dump `term<TAB>SO` for every term in the corpus.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// `+term` / `-term` lines; built-in seed words otherwise.
        #[arg(long)]
        paradigms: Option<PathBuf>,
        /// `document` or a window size in tokens.
        #[arg(long, default_value = "document")]
        context: String,
        #[arg(long, default_value_t = robopinion::lexicon::DEFAULT_SMOOTHING)]
        smoothing: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Pipeline settings; each flag overrides the same key in `--config`.
#[derive(Args, Default)]
struct Knobs {
    /// key=value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Concept file (`concept=` and `sub=` lines).
    #[arg(long)]
    concept: Option<String>,
    /// Directory of debate posts for orienting worded answers.
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    paradigms: Option<String>,
    /// Scripted answers; interactive when neither this nor a config script is set.
    #[arg(long)]
    script: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Offset amplitude in distance units.
    #[arg(long)]
    delta_max: Option<String>,
    /// Multiplier on the offset amplitude.
    #[arg(long)]
    stress: Option<String>,
    /// Neutral half-band, in [0, 0.5).
    #[arg(long)]
    epsilon: Option<String>,
    /// Aberrations within this many standard deviations count as zero.
    #[arg(long)]
    noise_floor: Option<String>,
    #[arg(long)]
    alpha_individual: Option<String>,
    #[arg(long)]
    alpha_joint: Option<String>,
    /// Multiplier on the process-noise covariance.
    #[arg(long)]
    q_scale: Option<String>,
    /// Multiplier on the observation-noise covariance.
    #[arg(long)]
    r_scale: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    sensor_range: Option<String>,
    /// Side of the square landscape.
    #[arg(long)]
    side: Option<String>,
    /// Longest forward move per step.
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    laps: Option<String>,
    /// NN or JCBB.
    #[arg(long)]
    associator: Option<String>,
    /// Orientation at which a worded answer saturates to 1 or 5.
    #[arg(long)]
    sigma: Option<String>,
    /// Concordance window.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    smoothing: Option<String>,
    /// `document` or a window size.
    #[arg(long)]
    context: Option<String>,
}

impl Knobs {
    fn resolve(&self) -> Result<PipelineConfig, Error> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        let flags = [
            ("concept", &self.concept),
            ("corpus", &self.corpus),
            ("paradigms", &self.paradigms),
            ("script", &self.script),
            ("out", &self.out),
            ("delta_max", &self.delta_max),
            ("stress", &self.stress),
            ("epsilon", &self.epsilon),
            ("noise_floor", &self.noise_floor),
            ("alpha_individual", &self.alpha_individual),
            ("alpha_joint", &self.alpha_joint),
            ("q_scale", &self.q_scale),
            ("r_scale", &self.r_scale),
            ("seed", &self.seed),
            ("sensor_range", &self.sensor_range),
            ("side", &self.side),
            ("step", &self.step),
            ("laps", &self.laps),
            ("associator", &self.associator),
            ("sigma", &self.sigma),
            ("window", &self.window),
            ("smoothing", &self.smoothing),
            ("context", &self.context),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn context_mode(raw: &str) -> Result<ContextMode, Error> {
    let mut c = PipelineConfig::default();
    c.set("context", raw)?;
    c.validate()?;
    Ok(c.context)
}

fn interactive() -> PromptedAnswers<io::StdinLock<'static>, io::Stderr> {
    PromptedAnswers::new(io::stdin().lock(), io::stderr())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Lexicon {
            action: LexiconCommand::Build { corpus, paradigms, context, smoothing, output },
        } => {
            let corpus = Corpus::load_dir(&corpus)?;
            let paradigms = match paradigms {
                Some(p) => ParadigmSets::parse(&read(&p)?)?,
                None => ParadigmSets::default(),
            };
            let table = CooccurrenceTable::build(corpus.docs(), context_mode(&context)?)?.with_smoothing(smoothing)?;
            emit(output.as_deref(), &table.dump(&paradigms)?)
        }
        Command::Concord { corpus, term, window, output } => {
            let corpus = Corpus::load_dir(&corpus)?;
            let lines = concordance_with_window(&term, corpus.docs(), window)?;
            emit(output.as_deref(), &concordance_tsv(&lines))
        }
        Command::Interview(knobs) => {
            let config = knobs.resolve()?;
            let spec = pipeline::load_concept(&config)?;
            let lexicon = pipeline::load_lexicon(&config)?;
            let record = if config.script.is_some() {
                pipeline::interview(&config, &spec, lexicon.as_ref(), None)?
            } else {
                let mut prompts = interactive();
                pipeline::interview(&config, &spec, lexicon.as_ref(), Some(&mut prompts))?
            };
            for index in record.flagged() {
                eprintln!("note: sub-concept {index} was unanswered and recorded as neutral");
            }
            let written = write_artifacts(&config.out, &[(pipeline::SESSION_FILE, write_session(&record))])?;
            println!("{}", written[0].display());
            Ok(())
        }
        Command::Simulate { session, knobs } => {
            let config = knobs.resolve()?;
            let spec = pipeline::load_concept(&config)?;
            let file = parse_session_with_window(&read(&session)?, config.window)?;
            let landscape = pipeline::build_landscape(&config, &spec, &file.responses())?;
            let run = pipeline::simulate(&config, &landscape)?;
            let gt = &landscape.ground_truth;
            write_artifacts(
                &config.out,
                &[
                    (pipeline::MAP_FILE, gt.to_csv()),
                    (pipeline::TRAIL_FILE, run.trail_csv()),
                    (pipeline::ASSOCIATIONS_FILE, run.associations_csv()),
                    (pipeline::FINAL_MAP_FILE, run.final_map_csv(gt)),
                ],
            )?;
            println!("{} steps, correct association rate {:.4}", run.trail.len(), run.correct_rate);
            Ok(())
        }
        Command::Score { aberrations, epsilon } => {
            let profile = AberrationProfile::from_csv(&read(&aberrations)?)?;
            let result = match score_profile(&profile, epsilon)? {
                Some(r) => r,
                None => {
                    eprintln!("note: constant profile, reporting a perfectly neutral opinion");
                    PolarityResult::neutral()
                }
            };
            emit(None, &result.to_csv())
        }
        Command::Pipeline(knobs) => {
            let config = knobs.resolve()?;
            let outcome = if config.script.is_some() {
                pipeline::run_pipeline(&config, None)?
            } else {
                let mut prompts = interactive();
                pipeline::run_pipeline(&config, Some(&mut prompts))?
            };
            if outcome.scored.degenerate() {
                eprintln!("note: constant aberration profile, opinion is perfectly neutral");
            }
            print!("{}", outcome.scored.result.to_csv());
            Ok(())
        }
        Command::CompareAssoc { runs, r_factors, knobs } => {
            let config = knobs.resolve()?;
            let spec = pipeline::load_concept(&config)?;
            let responses: Vec<_> = match &config.script {
                Some(_) => pipeline::interview(&config, &spec, None, None)?.responses,
                None => Vec::new(),
            };
            let landscape = if responses.is_empty() {
                let gt = robopinion::landscape::GroundTruthMap::build(&spec, config.side, None)?;
                let observed = gt.landmarks().iter().map(|l| l.position).collect();
                pipeline::Landscape { ground_truth: gt, offsets: Vec::new(), observed }
            } else {
                pipeline::build_landscape(&config, &spec, &responses)?
            };
            let rows = compare_associators(
                &landscape.ground_truth,
                &landscape.observed,
                config.sim_config(),
                &r_factors,
                runs,
            )?;
            emit(None, &summary_csv(&rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
