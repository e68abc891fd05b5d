//! Square-lap simulator: a robot drives the ground-truth trajectory and
//! observes the opinion-shifted features while the EKF builds its own map.
//!
//! Randomness comes from one `ChaCha8Rng` per run seeded with the run seed.
//! Standard normals are drawn in a fixed order: three for the motion noise of
//! each step (none at step 0), then two per visible feature, features sorted
//! by true range and then by landmark order.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::association::{AssociationConfig, Associator};
use super::{is_psd, wrap_angle, Observation, RobotPose, SlamError, SlamState};
use crate::landscape::{map_csv, GroundTruthMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    pub forward: f64,
    pub turn: f64,
}

/// Process noise per step and sensor noise per observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub q: Matrix3<f64>,
    pub r: Matrix2<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        let heading = 0.5f64.to_radians();
        NoiseModel {
            q: Matrix3::from_diagonal(&Vector3::new(0.05 * 0.05, 0.05 * 0.05, heading * heading)),
            r: Matrix2::from_diagonal(&Vector2::new(0.1 * 0.1, 0.1 * 0.1)),
        }
    }
}

impl NoiseModel {
    pub fn zero() -> Self {
        NoiseModel {
            q: Matrix3::zeros(),
            r: Matrix2::zeros(),
        }
    }

    pub fn scaled(self, q_factor: f64, r_factor: f64) -> Self {
        NoiseModel {
            q: self.q * q_factor,
            r: self.r * r_factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub noise: NoiseModel,
    pub sensor_range: f64,
    /// Longest forward move per step.
    pub step: f64,
    pub laps: usize,
    pub seed: u64,
    pub associator: Associator,
    pub association: AssociationConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            noise: NoiseModel::default(),
            sensor_range: 30.0,
            step: 1.0,
            laps: 1,
            seed: 0,
            associator: Associator::Jcbb,
            association: AssociationConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SlamError> {
        let dyn3 = DMatrix::from_column_slice(3, 3, self.noise.q.as_slice());
        if !is_psd(&dyn3, 1e-12) {
            return Err(SlamError::ProcessNoiseNotPsd);
        }
        let dyn2 = DMatrix::from_column_slice(2, 2, self.noise.r.as_slice());
        if !is_psd(&dyn2, 1e-12) {
            return Err(SlamError::ObservationNoiseNotPsd);
        }
        if !(self.sensor_range > 0.0 && self.sensor_range.is_finite()) {
            return Err(SlamError::Config(format!("sensor range {}", self.sensor_range)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SlamError::Config(format!("step {}", self.step)));
        }
        if self.laps == 0 {
            return Err(SlamError::Config("laps must be at least 1".into()));
        }
        let a = &self.association;
        for alpha in [a.alpha_individual, a.alpha_joint] {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(SlamError::BadAlpha(alpha));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailPoint {
    pub step: usize,
    pub truth: RobotPose,
    pub estimate: RobotPose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssociationRecord {
    pub step: usize,
    pub obs: usize,
    /// Existing slot the observation was paired with.
    pub slot: Option<usize>,
    /// Slot created for an unpaired observation.
    pub created: Option<usize>,
    pub true_id: i32,
    pub correct: bool,
}

impl AssociationRecord {
    /// The slot this observation ended up feeding.
    pub fn landed(&self) -> Option<usize> {
        self.slot.or(self.created)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub associator: Associator,
    pub seed: u64,
    pub trail: Vec<TrailPoint>,
    pub final_state: SlamState,
    pub history: Vec<AssociationRecord>,
    /// Fraction of correct association decisions; 1 when nothing was seen.
    pub correct_rate: f64,
}

impl RunResult {
    /// Ground-truth feature each slot stands for, by majority over the
    /// observations that fed it (ties to the lower index).
    pub fn slot_majorities(&self) -> Vec<Option<(i32, usize)>> {
        let mut votes: Vec<BTreeMap<i32, usize>> = vec![BTreeMap::new(); self.final_state.landmark_count()];
        for rec in &self.history {
            if let Some(slot) = rec.landed() {
                *votes[slot].entry(rec.true_id).or_default() += 1;
            }
        }
        votes
            .iter()
            .map(|v| {
                v.iter()
                    .fold(None, |best: Option<(i32, usize)>, (&id, &n)| match best {
                        Some((_, bn)) if bn >= n => best,
                        _ => Some((id, n)),
                    })
            })
            .collect()
    }

    /// Feature index to the slot that best represents it: among slots whose
    /// majority is that feature, the one with most votes (ties to lower slot).
    pub fn feature_slots(&self) -> BTreeMap<i32, usize> {
        let mut best: BTreeMap<i32, (usize, usize)> = BTreeMap::new();
        for (slot, m) in self.slot_majorities().into_iter().enumerate() {
            if let Some((id, n)) = m {
                let e = best.entry(id).or_insert((slot, n));
                if n > e.1 {
                    *e = (slot, n);
                }
            }
        }
        best.into_iter().map(|(id, (slot, _))| (id, slot)).collect()
    }

    pub fn trail_csv(&self) -> String {
        let mut out = String::from("step,true_x,true_y,true_theta,est_x,est_y,est_theta\n");
        for t in &self.trail {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                t.step, t.truth.x, t.truth.y, t.truth.theta, t.estimate.x, t.estimate.y, t.estimate.theta
            ));
        }
        out
    }

    pub fn associations_csv(&self) -> String {
        let mut out = String::from("step,obs,slot,true_id,correct\n");
        for r in &self.history {
            let slot = r.slot.map_or_else(|| "-".to_string(), |s| s.to_string());
            out.push_str(&format!("{},{},{},{},{}\n", r.step, r.obs, slot, r.true_id, u8::from(r.correct)));
        }
        out
    }

    /// Estimated map in the landscape dump layout; unmapped features are left out.
    pub fn final_map_csv(&self, gt: &GroundTruthMap) -> String {
        let slots = self.feature_slots();
        map_csv(gt.landmarks().iter().filter_map(|l| {
            let slot = *slots.get(&l.index)?;
            Some((l, self.final_state.landmark(slot)?))
        }))
    }
}

/// Symmetric square root of a PSD matrix.
fn psd_sqrt(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Stepwise run, so callers can inspect the filter between steps.
pub struct Simulation {
    config: SimConfig,
    features: Vec<(i32, Vector2<f64>)>,
    waypoints: Vec<Vector2<f64>>,
    next_waypoint: usize,
    truth: RobotPose,
    state: SlamState,
    rng: ChaCha8Rng,
    q_sqrt: Matrix3<f64>,
    r_sqrt: Matrix2<f64>,
    step: usize,
    max_steps: usize,
    finished: bool,
    trail: Vec<TrailPoint>,
    history: Vec<AssociationRecord>,
}

impl Simulation {
    /// `observed` holds the world positions the sensor sees, one per landmark
    /// of `gt` in the same order.
    pub fn new(gt: &GroundTruthMap, observed: &[Vector2<f64>], config: SimConfig) -> Result<Self, SlamError> {
        config.validate()?;
        if observed.len() != gt.landmarks().len() {
            return Err(SlamError::Dimension(format!(
                "{} observed positions for {} landmarks",
                observed.len(),
                gt.landmarks().len()
            )));
        }
        let corners = gt.trajectory();
        let start = corners[0];
        let mut waypoints = Vec::new();
        for _ in 0..config.laps {
            waypoints.extend_from_slice(&corners[1..]);
        }
        let perimeter = 4.0 * gt.side();
        let max_steps = (2.0 * perimeter * config.laps as f64 / config.step).ceil() as usize + 16;

        let truth = RobotPose::new(start.x, start.y, 0.0);
        let q_sqrt = psd_sqrt(DMatrix::from_column_slice(3, 3, config.noise.q.as_slice()));
        let r_sqrt = psd_sqrt(DMatrix::from_column_slice(2, 2, config.noise.r.as_slice()));
        Ok(Simulation {
            features: gt.landmarks().iter().map(|l| l.index).zip(observed.iter().copied()).collect(),
            waypoints,
            next_waypoint: 0,
            truth,
            state: SlamState::new(truth, Matrix3::zeros()),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            q_sqrt: Matrix3::from_column_slice(q_sqrt.as_slice()),
            r_sqrt: Matrix2::from_column_slice(r_sqrt.as_slice()),
            step: 0,
            max_steps,
            finished: false,
            trail: Vec::new(),
            history: Vec::new(),
            config,
        })
    }

    pub fn state(&self) -> &SlamState {
        &self.state
    }

    pub fn truth(&self) -> RobotPose {
        self.truth
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn normal2(&mut self) -> Vector2<f64> {
        Vector2::new(self.rng.sample(StandardNormal), self.rng.sample(StandardNormal))
    }

    /// Forward motion toward the current waypoint, then a turn to face the
    /// one after the move. `None` once the last waypoint is reached.
    fn next_control(&mut self) -> Option<Control> {
        let reach = 0.5 * self.config.step;
        loop {
            let target = *self.waypoints.get(self.next_waypoint)?;
            if (target - self.truth.position()).norm() < reach {
                self.next_waypoint += 1;
                continue;
            }
            let forward = self.config.step.min((target - self.truth.position()).norm());
            let moved = self.truth.advance(Control { forward, turn: 0.0 });
            let mut aim = target;
            if (target - moved.position()).norm() < reach {
                if let Some(&after) = self.waypoints.get(self.next_waypoint + 1) {
                    aim = after;
                }
            }
            let d = aim - moved.position();
            let turn = if d.norm() > 0.0 {
                wrap_angle(d.y.atan2(d.x) - moved.theta)
            } else {
                0.0
            };
            return Some(Control { forward, turn });
        }
    }

    fn sense(&mut self) -> Vec<Observation> {
        let pos = self.truth.position();
        let mut visible: Vec<(f64, usize)> = self
            .features
            .iter()
            .enumerate()
            .map(|(k, (_, p))| ((p - pos).norm(), k))
            .filter(|(d, _)| *d <= self.config.sensor_range)
            .collect();
        visible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        visible
            .into_iter()
            .map(|(_, k)| {
                let (id, p) = self.features[k];
                let noise = self.r_sqrt * self.normal2();
                Observation {
                    z: self.truth.to_local(&p) + noise,
                    true_id: id,
                }
            })
            .collect()
    }

    /// Advances one step; returns `false` once the run is over.
    pub fn step(&mut self) -> Result<bool, SlamError> {
        if self.finished {
            return Ok(false);
        }
        if !self.trail.is_empty() {
            let control = match self.next_control() {
                Some(c) if self.step < self.max_steps => c,
                _ => {
                    self.finished = true;
                    return Ok(false);
                }
            };
            let w = Vector3::new(
                self.rng.sample(StandardNormal),
                self.rng.sample(StandardNormal),
                self.rng.sample(StandardNormal),
            );
            let w = self.q_sqrt * w;
            let moved = self.truth.advance(control);
            self.truth = RobotPose::new(moved.x + w.x, moved.y + w.y, moved.theta + w.z);
            self.state.predict(control, &self.config.noise.q)?;
            self.step += 1;
        }

        let observations = self.sense();
        let r = self.config.noise.r;
        let hypothesis = self
            .config
            .associator
            .associate(&self.state, &observations, &r, &self.config.association)?;
        let known: Vec<i32> = self.state.registry().to_vec();
        let created = self.state.ekf_update(&hypothesis, &observations, &r)?;
        let mut fresh = created.into_iter();
        for (i, (obs, pairing)) in observations.iter().zip(&hypothesis.pairing).enumerate() {
            let (correct, created) = match *pairing {
                Some(slot) => (known[slot] == obs.true_id, None),
                None => (!known.contains(&obs.true_id), fresh.next()),
            };
            self.history.push(AssociationRecord {
                step: self.step,
                obs: i,
                slot: *pairing,
                created,
                true_id: obs.true_id,
                correct,
            });
        }
        self.trail.push(TrailPoint {
            step: self.step,
            truth: self.truth,
            estimate: self.state.pose(),
        });
        Ok(true)
    }

    pub fn run_to_end(mut self) -> Result<RunResult, SlamError> {
        while self.step()? {}
        Ok(self.into_result())
    }

    pub fn into_result(self) -> RunResult {
        let total = self.history.len();
        let correct = self.history.iter().filter(|r| r.correct).count();
        RunResult {
            associator: self.config.associator,
            seed: self.config.seed,
            trail: self.trail,
            final_state: self.state,
            history: self.history,
            correct_rate: if total == 0 { 1.0 } else { correct as f64 / total as f64 },
        }
    }
}

pub fn simulate_run(gt: &GroundTruthMap, observed: &[Vector2<f64>], config: SimConfig) -> Result<RunResult, SlamError> {
    Simulation::new(gt, observed, config)?.run_to_end()
}
