//! Pipeline settings: a plain `key=value` file plus command-line overrides.
//!
//! ```text
//! # fixture run
//! concept=concept.txt
//! script=answers/all_negative.txt
//! seed=7
//! associator=JCBB
//! ```
//!
//! Relative paths in a file are resolved against the file's directory.
//! Unknown keys and out-of-range values are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::landscape::{DEFAULT_DELTA_MAX, DEFAULT_SIDE};
use crate::lexicon::{ContextMode, DEFAULT_SMOOTHING};
use crate::polarity::DEFAULT_EPSILON;
use crate::slam::{AssociationConfig, Associator, NoiseModel, SimConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown setting `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: {message}")]
    Value { key: String, message: String },
    #[error("`{0}` is required")]
    Missing(&'static str),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Every recognised key, in the order `describe` prints them.
pub const KEYS: [&str; 23] = [
    "concept",
    "corpus",
    "paradigms",
    "script",
    "out",
    "delta_max",
    "stress",
    "epsilon",
    "noise_floor",
    "alpha_individual",
    "alpha_joint",
    "q_scale",
    "r_scale",
    "seed",
    "sensor_range",
    "side",
    "step",
    "laps",
    "associator",
    "sigma",
    "window",
    "smoothing",
    "context",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub concept: Option<PathBuf>,
    /// Directory of debate posts; without it copula answers cannot be oriented.
    pub corpus: Option<PathBuf>,
    pub paradigms: Option<PathBuf>,
    /// Scripted answers; interactive when absent.
    pub script: Option<PathBuf>,
    pub out: PathBuf,
    pub delta_max: f64,
    /// Multiplies `delta_max`.
    pub stress: f64,
    pub epsilon: f64,
    /// Aberrations within this many standard deviations count as zero.
    pub noise_floor: f64,
    pub alpha_individual: f64,
    pub alpha_joint: f64,
    pub q_scale: f64,
    pub r_scale: f64,
    pub seed: u64,
    pub sensor_range: f64,
    pub side: f64,
    pub step: f64,
    pub laps: usize,
    pub associator: Associator,
    pub sigma: f64,
    pub window: usize,
    pub smoothing: f64,
    pub context: ContextMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        PipelineConfig {
            concept: None,
            corpus: None,
            paradigms: None,
            script: None,
            out: PathBuf::from("out"),
            delta_max: DEFAULT_DELTA_MAX,
            stress: 1.0,
            epsilon: DEFAULT_EPSILON,
            noise_floor: 3.0,
            alpha_individual: sim.association.alpha_individual,
            alpha_joint: sim.association.alpha_joint,
            q_scale: 1.0,
            r_scale: 1.0,
            seed: 0,
            sensor_range: sim.sensor_range,
            side: DEFAULT_SIDE,
            step: sim.step,
            laps: sim.laps,
            associator: sim.associator,
            sigma: 1.0,
            window: crate::corpus::DEFAULT_WINDOW,
            smoothing: DEFAULT_SMOOTHING,
            context: ContextMode::Document,
        }
    }
}

fn value_err(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| value_err(key, format!("`{raw}`: {e}")))
}

fn format_context(mode: ContextMode) -> String {
    match mode {
        ContextMode::Document => "document".into(),
        ContextMode::Window(k) => k.to_string(),
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut config = PipelineConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            })?;
            config.set_relative(key.trim(), value.trim(), base)?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Applies one setting; paths are taken as given.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set_relative(key, value, Path::new(""))
    }

    fn set_relative(&mut self, key: &str, value: &str, base: &Path) -> Result<(), ConfigError> {
        let path = || base.join(value);
        match key {
            "concept" => self.concept = Some(path()),
            "corpus" => self.corpus = Some(path()),
            "paradigms" => self.paradigms = Some(path()),
            "script" => self.script = Some(path()),
            "out" => self.out = path(),
            "delta_max" => self.delta_max = parse_num(key, value)?,
            "stress" => self.stress = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "noise_floor" => self.noise_floor = parse_num(key, value)?,
            "alpha_individual" => self.alpha_individual = parse_num(key, value)?,
            "alpha_joint" => self.alpha_joint = parse_num(key, value)?,
            "q_scale" => self.q_scale = parse_num(key, value)?,
            "r_scale" => self.r_scale = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "sensor_range" => self.sensor_range = parse_num(key, value)?,
            "side" => self.side = parse_num(key, value)?,
            "step" => self.step = parse_num(key, value)?,
            "laps" => self.laps = parse_num(key, value)?,
            "associator" => self.associator = value.parse().map_err(|e| value_err(key, e))?,
            "sigma" => self.sigma = parse_num(key, value)?,
            "window" => self.window = parse_num(key, value)?,
            "smoothing" => self.smoothing = parse_num(key, value)?,
            "context" => {
                self.context = if value.eq_ignore_ascii_case("document") {
                    ContextMode::Document
                } else {
                    ContextMode::Window(parse_num(key, value)?)
                }
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(value_err(key, format!("{v} must be positive")))
            }
        };
        let non_negative = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(value_err(key, format!("{v} must be non-negative")))
            }
        };
        let open_unit = |key: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(value_err(key, format!("{v} must lie in (0, 1)")))
            }
        };
        positive("delta_max", self.delta_max)?;
        positive("stress", self.stress)?;
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(value_err("epsilon", format!("{} must lie in [0, 0.5)", self.epsilon)));
        }
        non_negative("noise_floor", self.noise_floor)?;
        open_unit("alpha_individual", self.alpha_individual)?;
        open_unit("alpha_joint", self.alpha_joint)?;
        non_negative("q_scale", self.q_scale)?;
        non_negative("r_scale", self.r_scale)?;
        positive("sensor_range", self.sensor_range)?;
        positive("side", self.side)?;
        positive("step", self.step)?;
        if self.laps == 0 {
            return Err(value_err("laps", "must be at least 1"));
        }
        positive("sigma", self.sigma)?;
        if self.window == 0 {
            return Err(value_err("window", "must be at least 1"));
        }
        non_negative("smoothing", self.smoothing)?;
        if self.context == ContextMode::Window(0) {
            return Err(value_err("context", "window must be at least 1"));
        }
        Ok(())
    }

    pub fn concept_path(&self) -> Result<&Path, ConfigError> {
        self.concept.as_deref().ok_or(ConfigError::Missing("concept"))
    }

    /// Effective opinion amplitude.
    pub fn amplitude(&self) -> f64 {
        self.delta_max * self.stress
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            noise: NoiseModel::default().scaled(self.q_scale, self.r_scale),
            sensor_range: self.sensor_range,
            step: self.step,
            laps: self.laps,
            seed: self.seed,
            associator: self.associator,
            association: AssociationConfig {
                alpha_individual: self.alpha_individual,
                alpha_joint: self.alpha_joint,
                ..AssociationConfig::default()
            },
        }
    }

    /// The settings as a config file (paths as stored).
    pub fn describe(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let values = [
            path(&self.concept),
            path(&self.corpus),
            path(&self.paradigms),
            path(&self.script),
            self.out.display().to_string(),
            self.delta_max.to_string(),
            self.stress.to_string(),
            self.epsilon.to_string(),
            self.noise_floor.to_string(),
            self.alpha_individual.to_string(),
            self.alpha_joint.to_string(),
            self.q_scale.to_string(),
            self.r_scale.to_string(),
            self.seed.to_string(),
            self.sensor_range.to_string(),
            self.side.to_string(),
            self.step.to_string(),
            self.laps.to_string(),
            self.associator.name().to_string(),
            self.sigma.to_string(),
            self.window.to_string(),
            self.smoothing.to_string(),
            format_context(self.context),
        ];
        KEYS.iter()
            .zip(values)
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let text = "# demo\nconcept = c.txt\nseed=9\nassociator=nn\ncontext=4\n\nepsilon=0.1\n";
        let c = PipelineConfig::parse(text, Path::new("fixtures")).unwrap();
        assert_eq!(c.concept, Some(PathBuf::from("fixtures/c.txt")));
        assert_eq!(c.seed, 9);
        assert_eq!(c.associator, Associator::NearestNeighbour);
        assert_eq!(c.context, ContextMode::Window(4));
        assert_eq!(c.epsilon, 0.1);
        assert_eq!(c.delta_max, 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        let e = PipelineConfig::parse("colour=blue\n", Path::new("")).unwrap_err();
        assert!(matches!(e, ConfigError::UnknownKey(k) if k == "colour"));
        let e = PipelineConfig::parse("epsilon=0.6\n", Path::new("")).unwrap_err();
        assert!(matches!(e, ConfigError::Value { key, .. } if key == "epsilon"));
        let e = PipelineConfig::parse("seed\n", Path::new("")).unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 1, .. }));
        let e = PipelineConfig::parse("laps=-1\n", Path::new("")).unwrap_err();
        assert!(matches!(e, ConfigError::Value { .. }));
        assert!(PipelineConfig::parse("alpha_joint=1\n", Path::new("")).is_err());
        assert!(PipelineConfig::parse("associator=ml\n", Path::new("")).is_err());
    }

    #[test]
    fn describe_round_trips() {
        let mut c = PipelineConfig::default();
        c.set("concept", "a/b.txt").unwrap();
        c.set("context", "7").unwrap();
        c.set("r_scale", "25").unwrap();
        let again = PipelineConfig::parse(&c.describe(), Path::new("")).unwrap();
        assert_eq!(again, c);
        assert_eq!(c.describe().lines().count(), KEYS.len() - 3);
    }
}
