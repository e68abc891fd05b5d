//! EKF-SLAM with a Cartesian point detector.
//!
//! The state stacks the robot pose `(x, y, theta)` and two coordinates per
//! mapped landmark. A landmark at world position `p` seen from pose `r` is
//! observed at `Rot(theta)^T (p - r)`.

mod association;
mod gating;
mod sim;

pub use association::{
    individual_gate, jcbb, joint_mahalanobis2, nn_associate, AssociationConfig, Associator,
    Hypothesis,
};
pub use gating::{chi2_quantile, mahalanobis2};
pub use sim::{
    simulate_run, AssociationRecord, Control, NoiseModel, RunResult, SimConfig, Simulation,
    TrailPoint,
};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix2x3, Matrix3, Vector2};
use thiserror::Error;

pub const POSE_DIM: usize = 3;
pub const LANDMARK_DIM: usize = 2;

/// Added to the diagonal of every innovation covariance so that the
/// noiseless limit (zero process and sensor noise) stays solvable.
pub const INNOVATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SlamError {
    #[error("process noise covariance is not positive semidefinite")]
    ProcessNoiseNotPsd,
    #[error("observation noise covariance is not positive semidefinite")]
    ObservationNoiseNotPsd,
    #[error("landmark slot {0} is not mapped")]
    UnmappedSlot(usize),
    #[error("innovation covariance is singular or not positive definite")]
    SingularInnovation,
    #[error("confidence level {0} is outside (0, 1)")]
    BadAlpha(f64),
    #[error("chi-square degrees of freedom must be at least 1")]
    BadDof,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("hypothesis pairs a landmark with more than one observation")]
    NonInjective,
    #[error("hypothesis has {hypothesis} entries for {observations} observations")]
    HypothesisLength { hypothesis: usize, observations: usize },
    #[error("{got} observations exceed the joint search bound of {bound}")]
    TooManyObservations { got: usize, bound: usize },
    #[error("invalid simulation setting: {0}")]
    Config(String),
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub(crate) fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    let asym = (m - m.transpose()).abs().max();
    asym <= tol && m.clone().symmetric_eigenvalues().min() >= -tol
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    /// Always in `(-pi, pi]`.
    pub theta: f64,
}

impl RobotPose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        RobotPose {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    /// Odometry model: move `forward` along the current heading, then turn.
    pub fn advance(&self, control: Control) -> RobotPose {
        let (s, c) = self.theta.sin_cos();
        RobotPose::new(
            self.x + control.forward * c,
            self.y + control.forward * s,
            self.theta + control.turn,
        )
    }

    /// World point `p` expressed in this pose's frame.
    pub fn to_local(&self, p: &Vector2<f64>) -> Vector2<f64> {
        rotation(self.theta).transpose() * (p - self.position())
    }

    pub fn to_world(&self, z: &Vector2<f64>) -> Vector2<f64> {
        self.position() + rotation(self.theta) * z
    }

    /// Derivative of [`advance`](Self::advance) with respect to the pose.
    pub fn motion_jacobian(&self, control: Control) -> Matrix3<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix3::new(
            1.0, 0.0, -control.forward * s,
            0.0, 1.0, control.forward * c,
            0.0, 0.0, 1.0,
        )
    }

    /// Derivatives of [`to_world`](Self::to_world) with respect to the pose
    /// and to `z`.
    pub fn to_world_jacobians(&self, z: &Vector2<f64>) -> (Matrix2x3<f64>, Matrix2<f64>) {
        let (s, c) = self.theta.sin_cos();
        let g_r = Matrix2x3::new(
            1.0, 0.0, -s * z.x - c * z.y,
            0.0, 1.0, c * z.x - s * z.y,
        );
        (g_r, rotation(self.theta))
    }
}

/// A point detection in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub z: Vector2<f64>,
    /// Ground-truth landmark index; bookkeeping only, never read by association.
    pub true_id: i32,
}

/// Joint Gaussian over robot pose and mapped landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct SlamState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    registry: Vec<i32>,
}

impl SlamState {
    pub fn new(pose: RobotPose, pose_cov: Matrix3<f64>) -> Self {
        let mut cov = DMatrix::zeros(POSE_DIM, POSE_DIM);
        cov.fixed_view_mut::<3, 3>(0, 0).copy_from(&pose_cov);
        symmetrize(&mut cov);
        SlamState {
            mean: DVector::from_vec(vec![pose.x, pose.y, pose.theta]),
            cov,
            registry: Vec::new(),
        }
    }

    /// Builds a state from raw parts; `registry` must have one entry per landmark.
    pub fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>, registry: Vec<i32>) -> Result<Self, SlamError> {
        let dim = mean.len();
        if dim < POSE_DIM || !(dim - POSE_DIM).is_multiple_of(LANDMARK_DIM) {
            return Err(SlamError::Dimension(format!("state length {dim}")));
        }
        if cov.shape() != (dim, dim) {
            return Err(SlamError::Dimension(format!("covariance {:?} for state {dim}", cov.shape())));
        }
        if registry.len() != (dim - POSE_DIM) / LANDMARK_DIM {
            return Err(SlamError::Dimension("registry length".into()));
        }
        let mut state = SlamState { mean, cov, registry };
        state.mean[2] = wrap_angle(state.mean[2]);
        symmetrize(&mut state.cov);
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn landmark_count(&self) -> usize {
        (self.dim() - POSE_DIM) / LANDMARK_DIM
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Ground-truth identity recorded when each slot was created.
    pub fn registry(&self) -> &[i32] {
        &self.registry
    }

    pub fn pose(&self) -> RobotPose {
        RobotPose {
            x: self.mean[0],
            y: self.mean[1],
            theta: self.mean[2],
        }
    }

    fn slot_offset(slot: usize) -> usize {
        POSE_DIM + LANDMARK_DIM * slot
    }

    pub fn landmark(&self, slot: usize) -> Option<Vector2<f64>> {
        (slot < self.landmark_count()).then(|| {
            let o = Self::slot_offset(slot);
            Vector2::new(self.mean[o], self.mean[o + 1])
        })
    }

    pub fn landmark_covariance(&self, slot: usize) -> Option<Matrix2<f64>> {
        (slot < self.landmark_count()).then(|| {
            let o = Self::slot_offset(slot);
            self.cov.fixed_view::<2, 2>(o, o).into_owned()
        })
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.cov.clone().symmetric_eigenvalues().min()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.cov - self.cov.transpose()).abs().max()
    }

    /// Propagates the pose through the odometry model; `q` is added to the
    /// pose block after first-order propagation.
    pub fn predict(&mut self, control: Control, q: &Matrix3<f64>) -> Result<(), SlamError> {
        let q_dyn = DMatrix::from_iterator(3, 3, q.iter().copied());
        if !is_psd(&q_dyn, 1e-12) {
            return Err(SlamError::ProcessNoiseNotPsd);
        }
        let pose = self.pose();
        let next = pose.advance(control);
        self.mean[0] = next.x;
        self.mean[1] = next.y;
        self.mean[2] = next.theta;

        let f = pose.motion_jacobian(control);
        let dim = self.dim();
        let prr = self.cov.fixed_view::<3, 3>(0, 0).into_owned();
        let new_rr = f * prr * f.transpose() + q;
        self.cov.fixed_view_mut::<3, 3>(0, 0).copy_from(&new_rr);
        if dim > POSE_DIM {
            let rest = dim - POSE_DIM;
            let prm = self.cov.view((0, POSE_DIM), (3, rest)).into_owned();
            let f_dyn = DMatrix::from_iterator(3, 3, f.iter().copied());
            let new_rm = f_dyn * prm;
            self.cov.view_mut((0, POSE_DIM), (3, rest)).copy_from(&new_rm);
            self.cov.view_mut((POSE_DIM, 0), (rest, 3)).copy_from(&new_rm.transpose());
        }
        symmetrize(&mut self.cov);
        Ok(())
    }

    /// Predicted observation of `slot` and its Jacobian with respect to the
    /// full state (`2 x dim`).
    pub fn observe_model(&self, slot: usize) -> Result<(Vector2<f64>, DMatrix<f64>), SlamError> {
        let (z_hat, h_pose, h_lm) = self.observe_blocks(slot)?;
        let mut h = DMatrix::zeros(2, self.dim());
        h.fixed_view_mut::<2, 3>(0, 0).copy_from(&h_pose);
        let o = Self::slot_offset(slot);
        h.fixed_view_mut::<2, 2>(0, o).copy_from(&h_lm);
        Ok((z_hat, h))
    }

    /// Predicted observation with the two non-zero Jacobian blocks: pose
    /// (`2 x 3`) and landmark (`2 x 2`).
    pub(crate) fn observe_blocks(
        &self,
        slot: usize,
    ) -> Result<(Vector2<f64>, Matrix2x3<f64>, Matrix2<f64>), SlamError> {
        let p = self.landmark(slot).ok_or(SlamError::UnmappedSlot(slot))?;
        let pose = self.pose();
        let (s, c) = pose.theta.sin_cos();
        let z_hat = pose.to_local(&p);
        let h_pose = Matrix2x3::new(
            -c, -s, z_hat.y,
            s, -c, -z_hat.x,
        );
        let h_lm = Matrix2::new(c, s, -s, c);
        Ok((z_hat, h_pose, h_lm))
    }

    /// Appends the landmark implied by `obs` with cross-correlated covariance
    /// and returns its slot.
    pub fn augment_landmark(&mut self, obs: &Observation, r: &Matrix2<f64>) -> usize {
        let pose = self.pose();
        let p = pose.to_world(&obs.z);
        let (g_r, g_z) = pose.to_world_jacobians(&obs.z);

        let old = self.dim();
        let prr = self.cov.fixed_view::<3, 3>(0, 0).into_owned();
        let cross = {
            let g = DMatrix::from_iterator(2, 3, g_r.iter().copied());
            g * self.cov.view((0, 0), (3, old))
        };
        let p_ll = g_r * prr * g_r.transpose() + g_z * r * g_z.transpose();

        let mut mean = self.mean.clone().resize_vertically(old + 2, 0.0);
        mean[old] = p.x;
        mean[old + 1] = p.y;
        let mut cov = self.cov.clone().resize(old + 2, old + 2, 0.0);
        cov.view_mut((old, 0), (2, old)).copy_from(&cross);
        cov.view_mut((0, old), (old, 2)).copy_from(&cross.transpose());
        cov.fixed_view_mut::<2, 2>(old, old).copy_from(&p_ll);
        symmetrize(&mut cov);

        self.mean = mean;
        self.cov = cov;
        self.registry.push(obs.true_id);
        self.landmark_count() - 1
    }

    /// EKF update with the paired observations (Joseph form), then augments
    /// the unpaired ones in observation order. Returns the new slots.
    pub fn ekf_update(
        &mut self,
        hypothesis: &Hypothesis,
        observations: &[Observation],
        r: &Matrix2<f64>,
    ) -> Result<Vec<usize>, SlamError> {
        if hypothesis.pairing.len() != observations.len() {
            return Err(SlamError::HypothesisLength {
                hypothesis: hypothesis.pairing.len(),
                observations: observations.len(),
            });
        }
        if !hypothesis.is_injective() {
            return Err(SlamError::NonInjective);
        }
        let r_dyn = DMatrix::from_iterator(2, 2, r.iter().copied());
        if !is_psd(&r_dyn, 1e-12) {
            return Err(SlamError::ObservationNoiseNotPsd);
        }
        let pairs: Vec<(usize, usize)> = hypothesis
            .pairing
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i, s)))
            .collect();

        if !pairs.is_empty() {
            let dim = self.dim();
            let k = pairs.len();
            let mut h = DMatrix::zeros(2 * k, dim);
            let mut nu = DVector::zeros(2 * k);
            let mut r_blk = DMatrix::zeros(2 * k, 2 * k);
            for (row, &(i, slot)) in pairs.iter().enumerate() {
                let (z_hat, h_i) = self.observe_model(slot)?;
                h.view_mut((2 * row, 0), (2, dim)).copy_from(&h_i);
                let innov = observations[i].z - z_hat;
                nu[2 * row] = innov.x;
                nu[2 * row + 1] = innov.y;
                r_blk.view_mut((2 * row, 2 * row), (2, 2)).copy_from(&r_dyn);
            }
            let hp = &h * &self.cov;
            let mut s = &hp * h.transpose() + &r_blk;
            symmetrize(&mut s);
            for d in 0..2 * k {
                s[(d, d)] += INNOVATION_FLOOR;
            }
            let chol = s.cholesky().ok_or(SlamError::SingularInnovation)?;
            let gain = chol.solve(&hp).transpose();
            self.mean += &gain * nu;
            self.mean[2] = wrap_angle(self.mean[2]);
            let ikh = DMatrix::identity(dim, dim) - &gain * &h;
            let mut cov = &ikh * &self.cov * ikh.transpose() + &gain * r_blk * gain.transpose();
            symmetrize(&mut cov);
            self.cov = cov;
        }

        let created = hypothesis
            .pairing
            .iter()
            .zip(observations)
            .filter(|(s, _)| s.is_none())
            .map(|(_, obs)| self.augment_landmark(obs, r))
            .collect();
        Ok(created)
    }
}
