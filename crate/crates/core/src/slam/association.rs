//! Nearest-neighbour and joint-compatibility branch-and-bound association.
//!
//! A pairing of observation `i` with slot `j` is individually compatible when
//! its squared Mahalanobis distance is below `chi2(alpha_individual, 2)`. A
//! hypothesis with `k > 0` pairings is jointly compatible when every pairing is
//! individually compatible and the stacked innovation satisfies
//! `D^2 < chi2(alpha_joint, 2k)`; the empty hypothesis is always compatible.
//!
//! JCBB returns the compatible hypothesis with the most pairings, ties broken
//! by smaller `D^2`, then by lexicographic pairing order with "unpaired"
//! sorting after every slot.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix2x3, Vector2};

use super::gating::{chi2_quantile, mahalanobis2};
use super::{Observation, SlamError, SlamState, INNOVATION_FLOOR, POSE_DIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationConfig {
    pub alpha_individual: f64,
    pub alpha_joint: f64,
    /// Upper bound on observations handed to the joint search.
    pub max_observations: usize,
    /// Nearest neighbour removes a landmark once it has been paired.
    pub exclusive: bool,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        AssociationConfig {
            alpha_individual: 0.95,
            alpha_joint: 0.99,
            max_observations: 20,
            exclusive: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Associator {
    NearestNeighbour,
    Jcbb,
}

impl Associator {
    pub fn name(self) -> &'static str {
        match self {
            Associator::NearestNeighbour => "NN",
            Associator::Jcbb => "JCBB",
        }
    }

    pub fn associate(
        self,
        state: &SlamState,
        observations: &[Observation],
        r: &Matrix2<f64>,
        config: &AssociationConfig,
    ) -> Result<Hypothesis, SlamError> {
        match self {
            Associator::NearestNeighbour => nn_associate(state, observations, r, config),
            Associator::Jcbb => jcbb(state, observations, r, config),
        }
    }
}

impl std::str::FromStr for Associator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(Associator::NearestNeighbour),
            "jcbb" => Ok(Associator::Jcbb),
            other => Err(format!("unknown associator `{other}` (expected NN or JCBB)")),
        }
    }
}

/// Observation-to-slot pairing; `None` means the observation is unpaired.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hypothesis {
    pub pairing: Vec<Option<usize>>,
}

impl Hypothesis {
    pub fn unpaired(observations: usize) -> Self {
        Hypothesis {
            pairing: vec![None; observations],
        }
    }

    pub fn pairings(&self) -> usize {
        self.pairing.iter().filter(|p| p.is_some()).count()
    }

    pub fn is_injective(&self) -> bool {
        let mut slots: Vec<usize> = self.pairing.iter().flatten().copied().collect();
        slots.sort_unstable();
        slots.windows(2).all(|w| w[0] != w[1])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairing.iter().enumerate().filter_map(|(i, s)| s.map(|s| (i, s)))
    }
}

pub fn individual_gate(alpha: f64) -> Result<f64, SlamError> {
    chi2_quantile(alpha, 2)
}

/// Predicted observations and Jacobian blocks for every mapped slot.
struct Predicted<'a> {
    state: &'a SlamState,
    r: Matrix2<f64>,
    z_hat: Vec<Vector2<f64>>,
    h_pose: Vec<Matrix2x3<f64>>,
    h_lm: Vec<Matrix2<f64>>,
    cross: Vec<Option<Matrix2<f64>>>,
}

impl<'a> Predicted<'a> {
    fn new(state: &'a SlamState, r: &Matrix2<f64>) -> Result<Self, SlamError> {
        let m = state.landmark_count();
        let mut z_hat = Vec::with_capacity(m);
        let mut h_pose = Vec::with_capacity(m);
        let mut h_lm = Vec::with_capacity(m);
        for slot in 0..m {
            let (z, hp, hl) = state.observe_blocks(slot)?;
            z_hat.push(z);
            h_pose.push(hp);
            h_lm.push(hl);
        }
        Ok(Predicted {
            state,
            r: *r,
            z_hat,
            h_pose,
            h_lm,
            cross: vec![None; m * m],
        })
    }

    fn slots(&self) -> usize {
        self.z_hat.len()
    }

    /// `H_j P H_k^T`, from the non-zero Jacobian blocks only.
    fn cross_cov(&mut self, j: usize, k: usize) -> Matrix2<f64> {
        let m = self.slots();
        if let Some(c) = self.cross[j * m + k] {
            return c;
        }
        let p = self.state.covariance();
        let oj = POSE_DIM + 2 * j;
        let ok = POSE_DIM + 2 * k;
        let prr = p.fixed_view::<3, 3>(0, 0);
        let prk = p.fixed_view::<3, 2>(0, ok);
        let pjr = p.fixed_view::<2, 3>(oj, 0);
        let pjk = p.fixed_view::<2, 2>(oj, ok);
        let (hpj, hlj) = (self.h_pose[j], self.h_lm[j]);
        let (hpk, hlk) = (self.h_pose[k], self.h_lm[k]);
        let c = hpj * prr * hpk.transpose()
            + hpj * prk * hlk.transpose()
            + hlj * pjr * hpk.transpose()
            + hlj * pjk * hlk.transpose();
        self.cross[j * m + k] = Some(c);
        self.cross[k * m + j] = Some(c.transpose());
        c
    }

    fn individual_d2(&mut self, z: &Vector2<f64>, slot: usize) -> Result<f64, SlamError> {
        let s = self.cross_cov(slot, slot) + self.r + Matrix2::identity() * INNOVATION_FLOOR;
        let nu = z - self.z_hat[slot];
        mahalanobis2(
            &DVector::from_column_slice(nu.as_slice()),
            &DMatrix::from_column_slice(2, 2, s.as_slice()),
        )
    }

    fn joint_d2(&mut self, observations: &[Observation], pairs: &[(usize, usize)]) -> Result<f64, SlamError> {
        let k = pairs.len();
        let mut s = DMatrix::zeros(2 * k, 2 * k);
        let mut nu = DVector::zeros(2 * k);
        for (a, &(ia, ja)) in pairs.iter().enumerate() {
            let innov = observations[ia].z - self.z_hat[ja];
            nu[2 * a] = innov.x;
            nu[2 * a + 1] = innov.y;
            for (b, &(_, jb)) in pairs.iter().enumerate().skip(a) {
                let mut block = self.cross_cov(ja, jb);
                if a == b {
                    block += self.r + Matrix2::identity() * INNOVATION_FLOOR;
                }
                s.fixed_view_mut::<2, 2>(2 * a, 2 * b).copy_from(&block);
                s.fixed_view_mut::<2, 2>(2 * b, 2 * a).copy_from(&block.transpose());
            }
        }
        mahalanobis2(&nu, &s)
    }
}

/// Joint squared Mahalanobis distance of the paired observations in
/// `hypothesis` (0 for an empty hypothesis).
pub fn joint_mahalanobis2(
    state: &SlamState,
    observations: &[Observation],
    hypothesis: &Hypothesis,
    r: &Matrix2<f64>,
) -> Result<f64, SlamError> {
    let pairs: Vec<(usize, usize)> = hypothesis.pairs().collect();
    for &(_, slot) in &pairs {
        if slot >= state.landmark_count() {
            return Err(SlamError::UnmappedSlot(slot));
        }
    }
    Predicted::new(state, r)?.joint_d2(observations, &pairs)
}

/// Greedy nearest neighbour in observation order; ties go to the lowest slot.
pub fn nn_associate(
    state: &SlamState,
    observations: &[Observation],
    r: &Matrix2<f64>,
    config: &AssociationConfig,
) -> Result<Hypothesis, SlamError> {
    let gate = individual_gate(config.alpha_individual)?;
    let mut pred = Predicted::new(state, r)?;
    let mut used = vec![false; pred.slots()];
    let mut pairing = Vec::with_capacity(observations.len());
    for obs in observations {
        let mut best: Option<(usize, f64)> = None;
        for slot in 0..pred.slots() {
            if config.exclusive && used[slot] {
                continue;
            }
            let d2 = pred.individual_d2(&obs.z, slot)?;
            if d2 < gate && best.is_none_or(|(_, b)| d2 < b) {
                best = Some((slot, d2));
            }
        }
        if let Some((slot, _)) = best {
            used[slot] = true;
        }
        pairing.push(best.map(|(s, _)| s));
    }
    Ok(Hypothesis { pairing })
}

fn d2_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn lex_key(p: &Option<usize>) -> usize {
    p.unwrap_or(usize::MAX)
}

fn lex_cmp(a: &[Option<usize>], b: &[Option<usize>]) -> Ordering {
    a.iter().map(lex_key).cmp(b.iter().map(lex_key))
}

struct Search<'p, 'a> {
    pred: &'p mut Predicted<'a>,
    observations: &'p [Observation],
    candidates: Vec<Vec<usize>>,
    /// `thresholds[k] = chi2(alpha_joint, 2k)`
    thresholds: Vec<f64>,
    current: Vec<Option<usize>>,
    pairs: Vec<(usize, usize)>,
    used: Vec<bool>,
    best: Vec<Option<usize>>,
    best_count: usize,
    best_d2: f64,
}

impl Search<'_, '_> {
    /// Whether a branch that can reach at most `reach` pairings with a
    /// partial distance `d2` could still match or beat the incumbent.
    fn promising(&self, reach: usize, d2: f64) -> bool {
        match reach.cmp(&self.best_count) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => d2 <= self.best_d2 || d2_tie(d2, self.best_d2),
        }
    }

    fn leaf(&mut self, d2: f64) {
        let k = self.pairs.len();
        if k > 0 && d2 >= self.thresholds[k] {
            return;
        }
        let better = match k.cmp(&self.best_count) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal if d2_tie(d2, self.best_d2) => {
                lex_cmp(&self.current, &self.best) == Ordering::Less
            }
            Ordering::Equal => d2 < self.best_d2,
        };
        if better {
            self.best.clone_from(&self.current);
            self.best_count = k;
            self.best_d2 = d2;
        }
    }

    fn descend(&mut self, i: usize, d2: f64) -> Result<(), SlamError> {
        let m = self.observations.len();
        if i == m {
            self.leaf(d2);
            return Ok(());
        }
        let remaining = m - i - 1;
        let k = self.pairs.len();

        for c in 0..self.candidates[i].len() {
            let slot = self.candidates[i][c];
            let reach = k + 1 + remaining;
            if self.used[slot] || !self.promising(reach, d2) {
                continue;
            }
            self.pairs.push((i, slot));
            let joint = self.pred.joint_d2(self.observations, &self.pairs)?;
            // D^2 never decreases as pairings are added, so no extension of a
            // branch at or above the loosest reachable threshold can pass.
            if joint < self.thresholds[reach] && self.promising(reach, joint) {
                self.used[slot] = true;
                self.current[i] = Some(slot);
                self.descend(i + 1, joint)?;
                self.current[i] = None;
                self.used[slot] = false;
            }
            self.pairs.pop();
        }

        if self.promising(k + remaining, d2) {
            self.descend(i + 1, d2)?;
        }
        Ok(())
    }
}

/// Joint compatibility branch and bound.
pub fn jcbb(
    state: &SlamState,
    observations: &[Observation],
    r: &Matrix2<f64>,
    config: &AssociationConfig,
) -> Result<Hypothesis, SlamError> {
    let m = observations.len();
    if m > config.max_observations {
        return Err(SlamError::TooManyObservations {
            got: m,
            bound: config.max_observations,
        });
    }
    let gate = individual_gate(config.alpha_individual)?;
    let mut thresholds = vec![0.0];
    for k in 1..=m {
        thresholds.push(chi2_quantile(config.alpha_joint, 2 * k)?);
    }

    let mut pred = Predicted::new(state, r)?;
    let mut candidates = Vec::with_capacity(m);
    for obs in observations {
        let mut compatible = Vec::new();
        for slot in 0..pred.slots() {
            if pred.individual_d2(&obs.z, slot)? < gate {
                compatible.push(slot);
            }
        }
        candidates.push(compatible);
    }

    let slots = pred.slots();
    let mut search = Search {
        pred: &mut pred,
        observations,
        candidates,
        thresholds,
        current: vec![None; m],
        pairs: Vec::with_capacity(m),
        used: vec![false; slots],
        best: vec![None; m],
        best_count: 0,
        best_d2: 0.0,
    };
    search.descend(0, 0.0)?;
    Ok(Hypothesis { pairing: search.best })
}
