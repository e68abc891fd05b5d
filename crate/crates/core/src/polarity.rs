//! Aberration profile and slope-length polarity score.
//!
//! Each feature's aberration is how far the estimated landmark sits from its
//! imposed position along x. After scaling the profile to unit span the
//! score splits `[min, max]` into a positive slope, a negative slope and a
//! neutral band of half-width `epsilon` around zero.

use std::fmt::Write as _;

use thiserror::Error;

use crate::landscape::GroundTruthMap;
use crate::slam::RunResult;

pub const DEFAULT_EPSILON: f64 = 0.045;
pub const SPAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PolarityError {
    #[error("features never mapped during the run: {0:?}")]
    Unmapped(Vec<i32>),
    #[error("aberration profile is constant; the opinion is perfectly neutral")]
    Degenerate,
    #[error("aberration profile is not normalized")]
    NotNormalized,
    #[error("neutral half-band {0} must lie in [0, 0.5)")]
    BadEpsilon(f64),
    #[error("aberration profile has no dummy anchor")]
    NoAnchor,
    #[error("aberration {0} is not finite")]
    NonFinite(f64),
    #[error("aberration CSV line {line}: {message}")]
    Csv { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureAberration {
    pub index: i32,
    pub name: String,
    pub dummy: bool,
    pub value: f64,
    /// Standard deviation of the estimated x coordinate; 0 for anchors.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AberrationProfile {
    entries: Vec<FeatureAberration>,
    normalized: bool,
}

impl AberrationProfile {
    /// Unnormalized profile. Dummy entries are forced to zero and at least
    /// one must be present.
    pub fn new(mut entries: Vec<FeatureAberration>) -> Result<Self, PolarityError> {
        if !entries.iter().any(|e| e.dummy) {
            return Err(PolarityError::NoAnchor);
        }
        for e in &mut entries {
            if !e.value.is_finite() {
                return Err(PolarityError::NonFinite(e.value));
            }
            if e.dummy {
                e.value = 0.0;
                e.sigma = 0.0;
            }
        }
        Ok(AberrationProfile {
            entries,
            normalized: false,
        })
    }

    /// Profile over unnamed features `1..` with the two anchors at the front.
    pub fn from_values(values: &[f64]) -> Result<Self, PolarityError> {
        let anchors = [(-1, "pre-zero"), (0, "zero")].map(|(index, name)| FeatureAberration {
            index,
            name: name.to_string(),
            dummy: true,
            value: 0.0,
            sigma: 0.0,
        });
        let features = values.iter().enumerate().map(|(i, &v)| FeatureAberration {
            index: i as i32 + 1,
            name: format!("f{}", i + 1),
            dummy: false,
            value: v,
            sigma: 0.0,
        });
        Self::new(anchors.into_iter().chain(features).collect())
    }

    pub fn entries(&self) -> &[FeatureAberration] {
        &self.entries
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(f64::INFINITY, f64::min)
    }

    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            if !e.dummy {
                e.value = f(e.value);
            }
        }
        out
    }

    pub fn negated(&self) -> Self {
        self.map_values(|v| -v)
    }

    /// Zeroes every aberration within `k` standard deviations of zero, i.e.
    /// indistinguishable from estimation noise.
    pub fn suppress_below(&self, k: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            if e.value.abs() <= k * e.sigma {
                e.value = 0.0;
            }
        }
        out
    }

    /// Divides by the span so that `max - min = 1`.
    pub fn normalize(&self) -> Result<Self, PolarityError> {
        let span = self.span();
        if span <= 0.0 {
            return Err(PolarityError::Degenerate);
        }
        let mut out = self.map_values(|v| v / span);
        for e in &mut out.entries {
            e.sigma /= span;
        }
        out.normalized = true;
        Ok(out)
    }

    /// Reads the CSV written by `to_csv`; entries with index `<= 0` are the
    /// anchors. The result is unnormalized.
    pub fn from_csv(text: &str) -> Result<Self, PolarityError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: &str| PolarityError::Csv { line: i + 1, message: message.to_string() };
            let mut cols = line.split(',');
            let (Some(index), Some(name), Some(value), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(err("expected index,name,value"));
            };
            let index: i32 = index.trim().parse().map_err(|_| err("bad index"))?;
            let value: f64 = value.trim().parse().map_err(|_| err("bad value"))?;
            entries.push(FeatureAberration {
                index,
                name: name.trim().to_string(),
                dummy: index <= 0,
                value,
                sigma: 0.0,
            });
        }
        Self::new(entries)
    }

    /// CSV `index,name,aberration_normalized`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,name,aberration_normalized\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{}", e.index, e.name, e.value);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarityResult {
    pub pos_len: f64,
    pub neg_len: f64,
    pub neutral_len: f64,
    pub score: f64,
}

impl PolarityResult {
    /// What a degenerate profile reports.
    pub fn neutral() -> Self {
        PolarityResult {
            pos_len: 0.0,
            neg_len: 0.0,
            neutral_len: 1.0,
            score: 0.0,
        }
    }

    /// CSV `pos,neg,neutral,score`, one row.
    pub fn to_csv(&self) -> String {
        format!(
            "pos,neg,neutral,score\n{},{},{},{}\n",
            self.pos_len, self.neg_len, self.neutral_len, self.score
        )
    }
}

/// Aberrations of the final map against ground truth. Each feature is read
/// from the slot that the association history majority-assigns to it.
pub fn aberrations(run: &RunResult, gt: &GroundTruthMap) -> Result<AberrationProfile, PolarityError> {
    let slots = run.feature_slots();
    let mut missing = Vec::new();
    let mut entries = Vec::with_capacity(gt.landmarks().len());
    for l in gt.landmarks() {
        if l.dummy {
            entries.push(FeatureAberration {
                index: l.index,
                name: l.name.clone(),
                dummy: true,
                value: 0.0,
                sigma: 0.0,
            });
            continue;
        }
        let Some(&slot) = slots.get(&l.index) else {
            missing.push(l.index);
            continue;
        };
        let est = run.final_state.landmark(slot).expect("slot from history exists");
        let var = run.final_state.landmark_covariance(slot).expect("slot exists")[(0, 0)];
        entries.push(FeatureAberration {
            index: l.index,
            name: l.name.clone(),
            dummy: false,
            value: est.x - l.position.x,
            sigma: var.max(0.0).sqrt(),
        });
    }
    if !missing.is_empty() {
        return Err(PolarityError::Unmapped(missing));
    }
    AberrationProfile::new(entries)
}

pub fn check_epsilon(epsilon: f64) -> Result<(), PolarityError> {
    if (0.0..0.5).contains(&epsilon) {
        Ok(())
    } else {
        Err(PolarityError::BadEpsilon(epsilon))
    }
}

pub fn slope_lengths(profile: &AberrationProfile, epsilon: f64) -> Result<PolarityResult, PolarityError> {
    check_epsilon(epsilon)?;
    if !profile.is_normalized() || (profile.span() - 1.0).abs() > SPAN_TOLERANCE {
        return Err(PolarityError::NotNormalized);
    }
    let pos_len = (profile.max() - epsilon).max(0.0);
    let neg_len = (-profile.min() - epsilon).max(0.0);
    Ok(PolarityResult {
        pos_len,
        neg_len,
        neutral_len: 1.0 - pos_len - neg_len,
        score: pos_len - neg_len,
    })
}

/// Normalizes and scores; a constant profile comes back as `None`.
pub fn score_profile(profile: &AberrationProfile, epsilon: f64) -> Result<Option<PolarityResult>, PolarityError> {
    check_epsilon(epsilon)?;
    match profile.normalize() {
        Ok(p) => slope_lengths(&p, epsilon).map(Some),
        Err(PolarityError::Degenerate) => Ok(None),
        Err(e) => Err(e),
    }
}
