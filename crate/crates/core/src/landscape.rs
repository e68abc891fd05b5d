//! The imposed ground-truth landscape and the conversion of assessments
//! into observed feature positions.
//!
//! Landmarks sit evenly spaced along the perimeter of the square trajectory,
//! counter-clockwise from the start corner `(0, 0)`: pre-zero first, then
//! zero, then sub-concepts `1..=n`. An opinion moves a feature along x only.

use nalgebra::Vector2;
use thiserror::Error;

use crate::interview::{ConceptSpec, LikertResponse, SubConcept};

pub const DEFAULT_SIDE: f64 = 100.0;
pub const DEFAULT_DELTA_MAX: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum LandscapeError {
    #[error("expected {expected} feature values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("feature values violate sign or zero-sum constraints: {0}")]
    Constraint(String),
    #[error("square side must be positive and finite")]
    BadSide,
    #[error("sub-concept {0} is a dummy anchor and carries no opinion")]
    DummyOffset(i32),
    #[error("sub-concept {0} is not part of the concept")]
    UnknownIndex(i32),
    #[error("Likert level {0} is outside 1..=5")]
    Level(u8),
    #[error("offsets must cover each non-dummy landmark exactly once: {0}")]
    OffsetMismatch(String),
    #[error("prior map has no position for landmark {0}")]
    MissingPrior(i32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub index: i32,
    pub name: String,
    pub sign: i8,
    pub dummy: bool,
    pub position: Vector2<f64>,
    pub feature_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMap {
    landmarks: Vec<Landmark>,
    side: f64,
}

/// Point at arc length `s` along the square perimeter, counter-clockwise from
/// the origin.
pub fn perimeter_point(side: f64, s: f64) -> Vector2<f64> {
    let s = s.rem_euclid(4.0 * side);
    let leg = (s / side).floor();
    let t = s - leg * side;
    match leg as u8 {
        0 => Vector2::new(t, 0.0),
        1 => Vector2::new(side, t),
        2 => Vector2::new(side - t, side),
        _ => Vector2::new(0.0, side - t),
    }
}

fn default_values(spec: &ConceptSpec, v: f64) -> Vec<f64> {
    spec.sub_concepts().iter().map(|s| s.sign as f64 * v).collect()
}

fn validate_values(spec: &ConceptSpec, values: &[f64]) -> Result<(), LandscapeError> {
    if values.len() != spec.n() {
        return Err(LandscapeError::ValueCount {
            expected: spec.n(),
            got: values.len(),
        });
    }
    let mut offenders = Vec::new();
    for (sub, &v) in spec.sub_concepts().iter().zip(values) {
        let ok = v.is_finite() && if sub.sign > 0 { v >= 0.0 } else { v <= 0.0 };
        if !ok {
            offenders.push(format!("#{}={v}", sub.index));
        }
    }
    let sum: f64 = values.iter().sum();
    let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    if sum.abs() > 1e-12 * scale {
        offenders.push(format!("sum={sum}"));
    }
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(LandscapeError::Constraint(offenders.join(", ")))
    }
}

impl GroundTruthMap {
    /// Builds the map with feature values `values` (validated) or the default
    /// alternating `+1, -1, ...`.
    pub fn build(spec: &ConceptSpec, side: f64, values: Option<&[f64]>) -> Result<Self, LandscapeError> {
        let values = match values {
            Some(v) => {
                validate_values(spec, v)?;
                v.to_vec()
            }
            None => default_values(spec, 1.0),
        };
        if !(side.is_finite() && side > 0.0) {
            return Err(LandscapeError::BadSide);
        }
        let all = spec.all_with_dummies();
        let spacing = 4.0 * side / all.len() as f64;
        let landmarks = all
            .into_iter()
            .enumerate()
            .map(|(k, sub)| {
                let feature_value = if sub.dummy { 0.0 } else { values[(sub.index - 1) as usize] };
                Self::make_landmark(sub, perimeter_point(side, k as f64 * spacing), feature_value)
            })
            .collect();
        Ok(GroundTruthMap { landmarks, side })
    }

    /// Builds the map from a prior session's estimated landmark positions,
    /// given as `(index, position)` for every landmark including the dummies.
    pub fn from_prior(
        spec: &ConceptSpec,
        side: f64,
        prior: &[(i32, Vector2<f64>)],
        values: Option<&[f64]>,
    ) -> Result<Self, LandscapeError> {
        let mut map = Self::build(spec, side, values)?;
        for lm in &mut map.landmarks {
            let (_, p) = prior
                .iter()
                .find(|(i, _)| *i == lm.index)
                .ok_or(LandscapeError::MissingPrior(lm.index))?;
            lm.position = *p;
        }
        Ok(map)
    }

    fn make_landmark(sub: SubConcept, position: Vector2<f64>, feature_value: f64) -> Landmark {
        Landmark {
            index: sub.index,
            name: sub.name,
            sign: sub.sign,
            dummy: sub.dummy,
            position,
            feature_value,
        }
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn landmark(&self, index: i32) -> Option<&Landmark> {
        self.landmarks.iter().find(|l| l.index == index)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Corners of the square in driving order, closed back to the start.
    pub fn trajectory(&self) -> Vec<Vector2<f64>> {
        let s = self.side;
        vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(s, 0.0),
            Vector2::new(s, s),
            Vector2::new(0.0, s),
            Vector2::new(0.0, 0.0),
        ]
    }

    pub fn feature_sum(&self) -> f64 {
        self.landmarks.iter().filter(|l| !l.dummy).map(|l| l.feature_value).sum()
    }

    /// CSV dump `index,name,sign,dummy,x,y,feature_value`.
    pub fn to_csv(&self) -> String {
        map_csv(self.landmarks.iter().map(|l| (l, l.position)))
    }
}

/// Map CSV for the given landmarks at the given positions.
pub fn map_csv<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = (&'a Landmark, Vector2<f64>)>,
{
    let mut out = String::from("index,name,sign,dummy,x,y,feature_value\n");
    for (l, p) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            l.index, l.name, l.sign, l.dummy, p.x, p.y, l.feature_value
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpinionOffset {
    pub sub_concept_index: i32,
    pub delta_x: f64,
}

/// `delta_x = delta_max * likert_value * sign`.
pub fn opinion_offset(
    spec: &ConceptSpec,
    response: &LikertResponse,
    delta_max: f64,
) -> Result<OpinionOffset, LandscapeError> {
    let index = response.sub_concept_index;
    if index <= 0 {
        return Err(LandscapeError::DummyOffset(index));
    }
    let sub = spec.sub_concept(index).ok_or(LandscapeError::UnknownIndex(index))?;
    if !(1..=5).contains(&response.level) {
        return Err(LandscapeError::Level(response.level));
    }
    Ok(OpinionOffset {
        sub_concept_index: index,
        delta_x: delta_max * response.value() * sub.sign as f64,
    })
}

pub fn opinion_offsets(
    spec: &ConceptSpec,
    responses: &[LikertResponse],
    delta_max: f64,
) -> Result<Vec<OpinionOffset>, LandscapeError> {
    responses.iter().map(|r| opinion_offset(spec, r, delta_max)).collect()
}

/// World positions the sensor actually sees, in landmark order: ground truth
/// shifted by each feature's offset along x. Dummies never move.
pub fn place_observed_features(
    gt: &GroundTruthMap,
    offsets: &[OpinionOffset],
) -> Result<Vec<Vector2<f64>>, LandscapeError> {
    let features = gt.landmarks().iter().filter(|l| !l.dummy).count();
    if offsets.len() != features {
        return Err(LandscapeError::OffsetMismatch(format!(
            "{} offsets for {features} features",
            offsets.len()
        )));
    }
    gt.landmarks()
        .iter()
        .map(|lm| {
            if lm.dummy {
                return Ok(lm.position);
            }
            let mut hits = offsets.iter().filter(|o| o.sub_concept_index == lm.index);
            match (hits.next(), hits.next()) {
                (Some(o), None) => Ok(lm.position + Vector2::new(o.delta_x, 0.0)),
                _ => Err(LandscapeError::OffsetMismatch(format!("landmark {}", lm.index))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interview::{ResponseSource, ScriptedAnswers, SessionConfig};
    use proptest::prelude::*;

    fn spec(n: usize) -> ConceptSpec {
        ConceptSpec::new("c", (1..=n).map(|i| format!("f{i}"))).unwrap()
    }

    fn resp(index: i32, level: u8) -> LikertResponse {
        LikertResponse {
            sub_concept_index: index,
            level,
            source: ResponseSource::DirectAnswer,
        }
    }

    #[test]
    fn default_map() {
        let gt = GroundTruthMap::build(&spec(10), DEFAULT_SIDE, None).unwrap();
        assert_eq!(gt.landmarks().len(), 12);
        assert_eq!(gt.feature_sum(), 0.0);
        assert_eq!(gt.landmarks()[0].index, -1);
        assert_eq!(gt.landmarks()[0].position, Vector2::new(0.0, 0.0));
        assert_eq!(gt.landmarks()[1].index, 0);
        for l in gt.landmarks().iter().filter(|l| !l.dummy) {
            if l.index % 2 == 1 {
                assert!(l.feature_value >= 0.0);
            } else {
                assert!(l.feature_value <= 0.0);
            }
        }
        assert_eq!(gt.trajectory().len(), 5);
    }

    #[test]
    fn supplied_values() {
        let v = [2.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -2.0];
        let gt = GroundTruthMap::build(&spec(10), DEFAULT_SIDE, Some(&v)).unwrap();
        assert_eq!(gt.feature_sum(), 0.0);

        let bad = [1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -2.0];
        match GroundTruthMap::build(&spec(10), DEFAULT_SIDE, Some(&bad)) {
            Err(LandscapeError::Constraint(msg)) => assert!(msg.contains("#2=1"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let unbalanced = [2.0, -1.0];
        assert!(matches!(
            GroundTruthMap::build(&spec(2), DEFAULT_SIDE, Some(&unbalanced)),
            Err(LandscapeError::Constraint(m)) if m.contains("sum")
        ));
        assert!(matches!(
            GroundTruthMap::build(&spec(2), DEFAULT_SIDE, Some(&[1.0])),
            Err(LandscapeError::ValueCount { .. })
        ));
    }

    #[test]
    fn prior_map() {
        let s = spec(2);
        let prior: Vec<(i32, Vector2<f64>)> =
            (-1..=2).map(|i| (i, Vector2::new(i as f64, 5.0))).collect();
        let gt = GroundTruthMap::from_prior(&s, DEFAULT_SIDE, &prior, None).unwrap();
        assert_eq!(gt.landmark(2).unwrap().position, Vector2::new(2.0, 5.0));
        assert_eq!(gt.feature_sum(), 0.0);
        assert_eq!(
            GroundTruthMap::from_prior(&s, DEFAULT_SIDE, &prior[..3], None),
            Err(LandscapeError::MissingPrior(2))
        );
    }

    #[test]
    fn offsets() {
        let s = spec(10);
        assert_eq!(opinion_offset(&s, &resp(4, 3), 2.0).unwrap().delta_x, 0.0);
        assert_eq!(opinion_offset(&s, &resp(1, 5), 2.0).unwrap().delta_x, 2.0);
        assert_eq!(opinion_offset(&s, &resp(2, 5), 2.0).unwrap().delta_x, -2.0);
        assert_eq!(opinion_offset(&s, &resp(0, 5), 2.0), Err(LandscapeError::DummyOffset(0)));
        assert_eq!(opinion_offset(&s, &resp(-1, 5), 2.0), Err(LandscapeError::DummyOffset(-1)));
        assert_eq!(opinion_offset(&s, &resp(11, 5), 2.0), Err(LandscapeError::UnknownIndex(11)));
    }

    #[test]
    fn observed_positions() {
        let s = spec(10);
        let gt = GroundTruthMap::build(&s, DEFAULT_SIDE, None).unwrap();
        let zero: Vec<_> = (1..=10).map(|i| OpinionOffset { sub_concept_index: i, delta_x: 0.0 }).collect();
        let seen = place_observed_features(&gt, &zero).unwrap();
        let truth: Vec<_> = gt.landmarks().iter().map(|l| l.position).collect();
        assert_eq!(seen, truth);

        let mut one = zero.clone();
        one[0].delta_x = 2.0;
        let seen = place_observed_features(&gt, &one).unwrap();
        for (k, (a, b)) in seen.iter().zip(&truth).enumerate() {
            let expect = if k == 2 { b + Vector2::new(2.0, 0.0) } else { *b };
            assert_eq!(*a, expect);
        }
        assert!(place_observed_features(&gt, &one[1..]).is_err());
    }

    #[test]
    fn alternating_script_shifts_everything_right() {
        let s = spec(10);
        let gt = GroundTruthMap::build(&s, DEFAULT_SIDE, None).unwrap();
        let mut script = ScriptedAnswers::parse("5,1,5,1,5,1,5,1,5,1");
        let record = crate::interview::run_session(&s, &mut script, None, &SessionConfig::default()).unwrap();
        let offsets = opinion_offsets(&s, &record.responses, 2.0).unwrap();
        let seen = place_observed_features(&gt, &offsets).unwrap();
        for (lm, p) in gt.landmarks().iter().zip(&seen) {
            let dx = if lm.dummy { 0.0 } else { 2.0 };
            assert_eq!(p.x - lm.position.x, dx);
            assert_eq!(p.y, lm.position.y);
        }
    }

    #[test]
    fn csv_dump() {
        let gt = GroundTruthMap::build(&spec(2), DEFAULT_SIDE, None).unwrap();
        let csv = gt.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,name,sign,dummy,x,y,feature_value");
        assert_eq!(lines[1], "-1,pre-zero,0,true,0,0,0");
        assert_eq!(lines[3], "1,f1,1,false,100,100,1");
        assert_eq!(lines.len(), 5);
    }

    proptest! {
        #[test]
        fn placement_is_injective(half in 1usize..12, side in 1.0f64..500.0) {
            let gt = GroundTruthMap::build(&spec(2 * half), side, None).unwrap();
            let lms = gt.landmarks();
            prop_assert_eq!(gt.feature_sum(), 0.0);
            for i in 0..lms.len() {
                for j in i + 1..lms.len() {
                    prop_assert!((lms[i].position - lms[j].position).norm() > 1e-9);
                }
            }
        }

        #[test]
        fn dummies_never_move(levels in prop::collection::vec(1u8..=5, 10), dmax in 0.0f64..10.0) {
            let s = spec(10);
            let gt = GroundTruthMap::build(&s, DEFAULT_SIDE, None).unwrap();
            let responses: Vec<_> = levels.iter().enumerate().map(|(i, &l)| resp(i as i32 + 1, l)).collect();
            let offsets = opinion_offsets(&s, &responses, dmax).unwrap();
            for o in &offsets {
                prop_assert!(o.delta_x.abs() <= dmax);
            }
            let seen = place_observed_features(&gt, &offsets).unwrap();
            for (lm, p) in gt.landmarks().iter().zip(&seen) {
                if lm.dummy {
                    prop_assert_eq!(lm.position, *p);
                }
            }
        }
    }
}
