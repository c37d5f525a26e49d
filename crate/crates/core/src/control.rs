//! Reaction-null-space projector and the two velocity-level control laws.
//!
//! Every hatted quantity is built from parameter estimates through
//! [`EstimatedModel`]; the physical model never enters here.

use nalgebra::{Matrix2, Matrix2x3, Matrix3, RowVector3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric_positive_definite, pinv, row_pinv, singular_values};
use crate::model::SystemState;
use crate::regressor::{inertia_from_params, jacobians_from_params, DynParams, KinParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSet {
    /// Attitude gain, 1/s.
    pub lambda_b: f64,
    /// Tracking gain, 1/s.
    pub lambda_x: Matrix2<f64>,
    /// Pseudoinverse rank threshold.
    pub rank_tol: f64,
}

impl GainSet {
    pub fn new(lambda_b: f64, lambda_x: Matrix2<f64>, rank_tol: f64) -> Result<Self> {
        if !(lambda_b > 0.0 && lambda_b.is_finite()) {
            return Err(Error::InvalidGains(format!("lambda_b must be positive, got {lambda_b}")));
        }
        if !is_symmetric_positive_definite(&lambda_x) {
            return Err(Error::InvalidGains(format!(
                "Lambda_x must be symmetric positive definite, got {lambda_x}"
            )));
        }
        if !(rank_tol > 0.0 && rank_tol.is_finite()) {
            return Err(Error::InvalidGains(format!("rank_tol must be positive, got {rank_tol}")));
        }
        Ok(Self { lambda_b, lambda_x, rank_tol })
    }

    pub fn reference() -> Self {
        Self { lambda_b: 60.0, lambda_x: Matrix2::identity() * 20.0, rank_tol: 1e-8 }
    }
}

/// Coupling matrices and momentum constants formed from parameter estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatedModel {
    pub hb: f64,
    pub hbm: RowVector3<f64>,
    pub jb: Vector2<f64>,
    pub jm: Matrix2x3<f64>,
    pub p0: f64,
    pub v0: Vector2<f64>,
}

impl EstimatedModel {
    pub fn new(dynamic: &DynParams, kinematic: &KinParams, theta_b: f64, phi: &Vector3<f64>) -> Self {
        let (hb, hbm) = inertia_from_params(dynamic, theta_b, phi);
        let (jb, jm) = jacobians_from_params(kinematic, theta_b, phi);
        Self { hb, hbm, jb, jm, p0: dynamic.p0(), v0: kinematic.v0() }
    }
}

/// End-effector reference at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaskReference {
    pub x: Vector2<f64>,
    pub x_d: Vector2<f64>,
    pub x_d_dot: Vector2<f64>,
}

impl TaskReference {
    pub fn error(&self) -> Vector2<f64> {
        self.x - self.x_d
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlOutput {
    pub phi_dot_cmd: Vector3<f64>,
    pub zeta: Vector3<f64>,
}

/// Sliding variables and measurable error signals for one tick.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub s_b: f64,
    pub s_x: Vector2<f64>,
    pub y1: f64,
    pub y2: Vector2<f64>,
}

/// Vector part of the planar error quaternion.
pub fn attitude_error(theta_b: f64, theta_bd: f64) -> f64 {
    (0.5 * (theta_b - theta_bd)).sin()
}

pub fn rns_projector(hbm: &RowVector3<f64>, rank_tol: f64) -> Result<Matrix3<f64>> {
    let norm = hbm.norm();
    if !(norm > rank_tol) {
        return Err(Error::RankDeficientCoupling { norm, tolerance: rank_tol });
    }
    Ok(Matrix3::identity() - row_pinv(hbm) * hbm)
}

/// `p0_hat + Hb_hat * lambda_b * d_eps`
fn attitude_term(est: &EstimatedModel, gains: &GainSet, d_eps: f64) -> f64 {
    est.p0 + est.hb * gains.lambda_b * d_eps
}

/// Attitude-regulation law with an arbitrary null-space input `zeta`.
pub fn control_attitude_only(
    state: &SystemState,
    est: &EstimatedModel,
    zeta: &Vector3<f64>,
    gains: &GainSet,
    theta_bd: f64,
) -> Result<ControlOutput> {
    let t = rns_projector(&est.hbm, gains.rank_tol)?;
    let d_eps = attitude_error(state.theta_b, theta_bd);
    let phi_dot_cmd = t * zeta + row_pinv(&est.hbm) * attitude_term(est, gains, d_eps);
    Ok(ControlOutput { phi_dot_cmd, zeta: *zeta })
}

/// Null-space input that turns the attitude law into the combined
/// attitude + end-effector tracking law.
pub fn zeta_tracking(
    state: &SystemState,
    est: &EstimatedModel,
    task: &TaskReference,
    gains: &GainSet,
    theta_bd: f64,
) -> Result<Vector3<f64>> {
    let t = rns_projector(&est.hbm, gains.rank_tol)?;
    let jt = est.jm * t;
    let sv = singular_values(&jt);
    let sigma_max = sv[0];
    let sigma_min = sv[sv.len() - 1];
    let threshold = gains.rank_tol * sigma_max;
    if !(sigma_min > threshold) {
        return Err(Error::DynamicSingularity { sigma_min, threshold });
    }
    let d_eps = attitude_term(est, gains, attitude_error(state.theta_b, theta_bd));
    let rhs = -est.v0 + task.x_d_dot
        - gains.lambda_x * task.error()
        - est.jm * row_pinv(&est.hbm) * d_eps;
    Ok(pinv(&jt, gains.rank_tol) * rhs)
}

pub fn control_full(
    state: &SystemState,
    est: &EstimatedModel,
    task: &TaskReference,
    gains: &GainSet,
    theta_bd: f64,
) -> Result<ControlOutput> {
    let zeta = zeta_tracking(state, est, task, gains, theta_bd)?;
    control_attitude_only(state, est, &zeta, gains, theta_bd)
}

pub fn sliding_attitude(omega_b: f64, theta_b: f64, theta_bd: f64, lambda_b: f64) -> f64 {
    omega_b + lambda_b * attitude_error(theta_b, theta_bd)
}

pub fn sliding_task(dx: &Vector2<f64>, dx_dot: &Vector2<f64>, lambda_x: &Matrix2<f64>) -> Vector2<f64> {
    dx_dot + lambda_x * dx
}

/// `y1 = Hb_hat (omega_b + lambda_b d_eps) + Hbm_hat (phi_dot - phi_dot_cmd)`,
/// using the measured `omega_b` and `phi_dot` in `state`.
pub fn signal_y1(
    state: &SystemState,
    est: &EstimatedModel,
    phi_dot_cmd: &Vector3<f64>,
    gains: &GainSet,
    theta_bd: f64,
) -> f64 {
    let s_b = sliding_attitude(state.omega_b, state.theta_b, theta_bd, gains.lambda_b);
    est.hb * s_b + (est.hbm * (state.phi_dot - phi_dot_cmd))[0]
}

/// `y2 = Jb_hat omega_b + Jm_hat (phi_dot - phi_dot_cmd) - (dx_dot + Lambda_x dx)`,
/// with `x_dot` the measured end-effector velocity.
pub fn signal_y2(
    state: &SystemState,
    est: &EstimatedModel,
    phi_dot_cmd: &Vector3<f64>,
    task: &TaskReference,
    x_dot: &Vector2<f64>,
    gains: &GainSet,
) -> Vector2<f64> {
    let s_x = sliding_task(&task.error(), &(x_dot - task.x_d_dot), &gains.lambda_x);
    est.jb * state.omega_b + est.jm * (state.phi_dot - phi_dot_cmd) - s_x
}
