//! Planar free-floating base with a three-link serial arm.
//!
//! Body 0 is the spacecraft, bodies 1..=3 are the links. Every body carries
//! an inboard distance `l` (inboard joint to CM) and an outboard distance `r`
//! (CM to outboard joint). For the spacecraft, `r` is the distance from its
//! CM to joint 1 along the spacecraft x axis; its `l` is unused by the
//! geometry.
//!
//! Absolute body angles are `theta_0 = theta_b` and
//! `theta_i = theta_b + phi_1 + ... + phi_i`.

use nalgebra::{Matrix2x3, Matrix4, RowVector3, Vector2, Vector3};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{cross2, unit, unit_perp};

pub const NUM_BODIES: usize = 4;
pub const NUM_JOINTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct BodyParams {
    /// kg
    pub mass: f64,
    /// kg m^2, about the body's own CM
    pub inertia_cm: f64,
    /// m, inboard joint to CM
    pub l: f64,
    /// m, CM to outboard joint
    pub r: f64,
}

impl BodyParams {
    pub const fn new(mass: f64, inertia_cm: f64, l: f64, r: f64) -> Self {
        Self { mass, inertia_cm, l, r }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let ok = self.mass.is_finite()
            && self.inertia_cm.is_finite()
            && self.l.is_finite()
            && self.r.is_finite()
            && self.mass > 0.0
            && self.inertia_cm > 0.0
            && self.l >= 0.0
            && self.r >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!(
                "body {index}: need mass > 0, inertia > 0, l >= 0, r >= 0 (got {self:?})"
            )))
        }
    }
}

/// Validated physical description of the four-body chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    bodies: [BodyParams; NUM_BODIES],
}

impl ModelParams {
    pub fn new(bodies: [BodyParams; NUM_BODIES]) -> Result<Self> {
        for (i, b) in bodies.iter().enumerate() {
            b.validate(i)?;
        }
        Ok(Self { bodies })
    }

    pub fn from_slice(bodies: &[BodyParams]) -> Result<Self> {
        let arr: [BodyParams; NUM_BODIES] = bodies.try_into().map_err(|_| {
            Error::InvalidModel(format!("expected {NUM_BODIES} bodies, got {}", bodies.len()))
        })?;
        Self::new(arr)
    }

    /// The 3-DOF planar manipulator used throughout the examples and presets.
    pub fn reference() -> Self {
        Self {
            bodies: [
                BodyParams::new(61.2, 26.1120, 0.80, 0.80),
                BodyParams::new(6.3, 1.0290, 0.70, 0.70),
                BodyParams::new(5.4, 0.8820, 0.70, 0.70),
                BodyParams::new(5.1, 0.8330, 0.70, 0.70),
            ],
        }
    }

    pub fn bodies(&self) -> &[BodyParams; NUM_BODIES] {
        &self.bodies
    }

    pub fn total_mass(&self) -> f64 {
        self.bodies.iter().map(|b| b.mass).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemState {
    /// Spacecraft attitude, rad. Never wrapped inside the integrator.
    pub theta_b: f64,
    /// Spacecraft CM position, m.
    pub base_cm_pos: Vector2<f64>,
    /// Joint angles, rad.
    pub phi: Vector3<f64>,
    /// Spacecraft angular rate, rad/s.
    pub omega_b: f64,
    /// Spacecraft CM velocity, m/s.
    pub base_cm_vel: Vector2<f64>,
    /// Joint rates, rad/s.
    pub phi_dot: Vector3<f64>,
}

impl SystemState {
    pub fn at_rest(theta_b: f64, base_cm_pos: Vector2<f64>, phi: Vector3<f64>) -> Self {
        Self {
            theta_b,
            base_cm_pos,
            phi,
            omega_b: 0.0,
            base_cm_vel: Vector2::zeros(),
            phi_dot: Vector3::zeros(),
        }
    }

    pub fn body_angles(&self) -> [f64; NUM_BODIES] {
        body_angles(self.theta_b, &self.phi)
    }

    pub fn body_rates(&self) -> [f64; NUM_BODIES] {
        body_rates(self.omega_b, &self.phi_dot)
    }

    pub fn is_finite(&self) -> bool {
        self.theta_b.is_finite()
            && self.omega_b.is_finite()
            && self.base_cm_pos.iter().all(|v| v.is_finite())
            && self.base_cm_vel.iter().all(|v| v.is_finite())
            && self.phi.iter().all(|v| v.is_finite())
            && self.phi_dot.iter().all(|v| v.is_finite())
    }

    /// Same state with all velocities multiplied by `c`.
    pub fn scale_velocities(&self, c: f64) -> Self {
        Self {
            omega_b: self.omega_b * c,
            base_cm_vel: self.base_cm_vel * c,
            phi_dot: self.phi_dot * c,
            ..*self
        }
    }
}

pub fn body_angles(theta_b: f64, phi: &Vector3<f64>) -> [f64; NUM_BODIES] {
    let t1 = theta_b + phi[0];
    let t2 = t1 + phi[1];
    let t3 = t2 + phi[2];
    [theta_b, t1, t2, t3]
}

pub fn body_rates(omega_b: f64, phi_dot: &Vector3<f64>) -> [f64; NUM_BODIES] {
    let w1 = omega_b + phi_dot[0];
    let w2 = w1 + phi_dot[1];
    let w3 = w2 + phi_dot[2];
    [omega_b, w1, w2, w3]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kinematics {
    pub cm: [Vector2<f64>; NUM_BODIES],
    pub angles: [f64; NUM_BODIES],
    /// Joint positions, joint 1..=3.
    pub joints: [Vector2<f64>; NUM_JOINTS],
    pub end_effector: Vector2<f64>,
}

pub fn forward_kinematics(params: &ModelParams, state: &SystemState) -> Kinematics {
    let b = params.bodies();
    let angles = state.body_angles();
    let mut cm = [Vector2::zeros(); NUM_BODIES];
    let mut joints = [Vector2::zeros(); NUM_JOINTS];
    cm[0] = state.base_cm_pos;
    let mut joint = cm[0] + b[0].r * unit(angles[0]);
    for i in 1..NUM_BODIES {
        joints[i - 1] = joint;
        cm[i] = joint + b[i].l * unit(angles[i]);
        joint = cm[i] + b[i].r * unit(angles[i]);
    }
    Kinematics { cm, angles, joints, end_effector: joint }
}

pub fn system_cm(params: &ModelParams, state: &SystemState) -> Vector2<f64> {
    let kin = forward_kinematics(params, state);
    weighted_mean(params, &kin.cm)
}

fn weighted_mean(params: &ModelParams, v: &[Vector2<f64>; NUM_BODIES]) -> Vector2<f64> {
    let total = params.total_mass();
    params
        .bodies()
        .iter()
        .zip(v)
        .fold(Vector2::zeros(), |acc, (b, p)| acc + b.mass * p)
        / total
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyVelocities {
    pub cm: [Vector2<f64>; NUM_BODIES],
    pub rates: [f64; NUM_BODIES],
    pub end_effector: Vector2<f64>,
}

/// Outward velocity recursion along the chain.
pub fn body_velocities(params: &ModelParams, state: &SystemState) -> BodyVelocities {
    let b = params.bodies();
    let angles = state.body_angles();
    let rates = state.body_rates();
    let mut cm = [Vector2::zeros(); NUM_BODIES];
    cm[0] = state.base_cm_vel;
    let mut joint = cm[0] + rates[0] * b[0].r * unit_perp(angles[0]);
    for i in 1..NUM_BODIES {
        cm[i] = joint + rates[i] * b[i].l * unit_perp(angles[i]);
        joint = cm[i] + rates[i] * b[i].r * unit_perp(angles[i]);
    }
    BodyVelocities { cm, rates, end_effector: joint }
}

pub fn end_effector_velocity(params: &ModelParams, state: &SystemState) -> Vector2<f64> {
    body_velocities(params, state).end_effector
}

/// Total linear momentum and the angular momentum about the system CM.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumPair {
    /// kg m/s
    pub linear: Vector2<f64>,
    /// kg m^2/s
    pub angular_about_cm: f64,
}

impl MomentumPair {
    pub fn zero() -> Self {
        Self { linear: Vector2::zeros(), angular_about_cm: 0.0 }
    }

    /// Velocity of the system CM.
    pub fn cm_velocity(&self, params: &ModelParams) -> Vector2<f64> {
        self.linear / params.total_mass()
    }
}

/// Body-by-body momentum sum. This is the reference every other route in the
/// crate is checked against.
pub fn brute_force_momentum(params: &ModelParams, state: &SystemState) -> MomentumPair {
    let kin = forward_kinematics(params, state);
    let vel = body_velocities(params, state);
    let r_g = weighted_mean(params, &kin.cm);
    let mut linear = Vector2::zeros();
    let mut angular = 0.0;
    for (i, b) in params.bodies().iter().enumerate() {
        linear += b.mass * vel.cm[i];
        angular += b.inertia_cm * vel.rates[i] + b.mass * cross2(&(kin.cm[i] - r_g), &vel.cm[i]);
    }
    MomentumPair { linear, angular_about_cm: angular }
}

/// Configuration-independent mass/length combinations.
///
/// Body CM positions relative to the system CM are `sum_i cm_coeff[k][i] u(theta_i)`
/// and the end-effector position relative to the system CM is
/// `sum_i ee_coeff[i] u(theta_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassGeometry {
    pub cm_coeff: [[f64; NUM_BODIES]; NUM_BODIES],
    pub ee_coeff: [f64; NUM_BODIES],
    /// `coupling[(i, j)] = sum_k m_k cm_coeff[k][i] cm_coeff[k][j]`
    pub coupling: Matrix4<f64>,
}

pub fn mass_geometry(params: &ModelParams) -> MassGeometry {
    let b = params.bodies();
    let total = params.total_mass();
    // Coefficients relative to the spacecraft CM.
    let mut rel = [[0.0; NUM_BODIES]; NUM_BODIES];
    for k in 1..NUM_BODIES {
        rel[k][0] = b[0].r;
        for j in 1..k {
            rel[k][j] = b[j].l + b[j].r;
        }
        rel[k][k] = b[k].l;
    }
    let mut ee_rel = [0.0; NUM_BODIES];
    ee_rel[0] = b[0].r;
    for j in 1..NUM_BODIES {
        ee_rel[j] = b[j].l + b[j].r;
    }
    let mut mean = [0.0; NUM_BODIES];
    for i in 0..NUM_BODIES {
        mean[i] = (0..NUM_BODIES).map(|k| b[k].mass * rel[k][i]).sum::<f64>() / total;
    }
    let mut cm_coeff = [[0.0; NUM_BODIES]; NUM_BODIES];
    for k in 0..NUM_BODIES {
        for i in 0..NUM_BODIES {
            cm_coeff[k][i] = rel[k][i] - mean[i];
        }
    }
    let ee_coeff = std::array::from_fn(|i| ee_rel[i] - mean[i]);
    let coupling = Matrix4::from_fn(|i, j| {
        (0..NUM_BODIES).map(|k| b[k].mass * cm_coeff[k][i] * cm_coeff[k][j]).sum()
    });
    MassGeometry { cm_coeff, ee_coeff, coupling }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingMatrices {
    pub hb_bar: f64,
    pub hbm_bar: RowVector3<f64>,
    pub jb: Vector2<f64>,
    pub jm: Matrix2x3<f64>,
}

/// `Hb*omega_b + Hbm*phi_dot` is the angular momentum about the system CM and
/// `Jb*omega_b + Jm*phi_dot + v_cm` is the end-effector velocity.
pub fn coupling_matrices(params: &ModelParams, state: &SystemState) -> CouplingMatrices {
    let geo = mass_geometry(params);
    let b = params.bodies();
    let angles = state.body_angles();

    // dL/d(theta_dot_j) = I_j + sum_i W_ij cos(theta_i - theta_j)
    let per_body: [f64; NUM_BODIES] = std::array::from_fn(|j| {
        b[j].inertia_cm
            + (0..NUM_BODIES)
                .map(|i| geo.coupling[(i, j)] * (angles[i] - angles[j]).cos())
                .sum::<f64>()
    });
    // theta_dot_j = omega_b + sum_{k<=j} phi_dot_k
    let hb_bar = per_body.iter().sum();
    let hbm_bar = RowVector3::from_fn(|_, k| per_body[k + 1..].iter().sum());

    let lever: [Vector2<f64>; NUM_BODIES] =
        std::array::from_fn(|i| geo.ee_coeff[i] * unit_perp(angles[i]));
    let jb = lever.iter().sum();
    let mut jm = Matrix2x3::zeros();
    for k in 0..NUM_JOINTS {
        let col: Vector2<f64> = lever[k + 1..].iter().sum();
        jm.set_column(k, &col);
    }
    CouplingMatrices { hb_bar, hbm_bar, jb, jm }
}

/// Smallest base inertia accepted before the model is considered corrupted.
pub const BASE_INERTIA_TOLERANCE: f64 = 1e-9;

/// Resolves `(omega_b, base_cm_vel)` from the conserved momenta given the
/// pose in `state` and the joint rates `phi_dot`. Velocities stored in
/// `state` are ignored.
pub fn base_velocity_from_momentum(
    params: &ModelParams,
    state: &SystemState,
    phi_dot: &Vector3<f64>,
    momenta: &MomentumPair,
) -> Result<(f64, Vector2<f64>)> {
    let cm = coupling_matrices(params, state);
    if !(cm.hb_bar > BASE_INERTIA_TOLERANCE) {
        return Err(Error::NonpositiveBaseInertia {
            value: cm.hb_bar,
            tolerance: BASE_INERTIA_TOLERANCE,
        });
    }
    let omega_b = (momenta.angular_about_cm - (cm.hbm_bar * phi_dot)[0]) / cm.hb_bar;

    // c_0 = r_G + sum_i B_0i u(theta_i)
    let geo = mass_geometry(params);
    let angles = state.body_angles();
    let rates = body_rates(omega_b, phi_dot);
    let base_cm_vel = (0..NUM_BODIES).fold(momenta.cm_velocity(params), |acc, i| {
        acc + geo.cm_coeff[0][i] * rates[i] * unit_perp(angles[i])
    });
    Ok((omega_b, base_cm_vel))
}

/// Copy of `state` with `phi_dot` installed and the base velocities resolved
/// from `momenta`.
pub fn with_resolved_base(
    params: &ModelParams,
    state: &SystemState,
    phi_dot: &Vector3<f64>,
    momenta: &MomentumPair,
) -> Result<SystemState> {
    let (omega_b, base_cm_vel) = base_velocity_from_momentum(params, state, phi_dot, momenta)?;
    Ok(SystemState { omega_b, base_cm_vel, phi_dot: *phi_dot, ..*state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference_initial() -> SystemState {
        SystemState {
            theta_b: 0.0,
            base_cm_pos: Vector2::zeros(),
            phi: Vector3::new(PI / 3.0, -2.0 * PI / 3.0, PI / 3.0),
            omega_b: -0.05,
            base_cm_vel: Vector2::new(0.1, 0.1),
            phi_dot: Vector3::new(0.05, -0.01, 0.09),
        }
    }

    #[test]
    fn straight_chain_reaches_sum_of_lengths() {
        let p = ModelParams::reference();
        let s = SystemState::at_rest(0.0, Vector2::zeros(), Vector3::zeros());
        let ee = forward_kinematics(&p, &s).end_effector;
        assert!((ee.x - 5.0).abs() < 1e-12);
        assert!(ee.y.abs() < 1e-12);
    }

    #[test]
    fn initial_end_effector_position() {
        // Spacecraft CM at the origin puts the tip at (3.6, 0); the desired
        // circle starts at (4.0, 0.2).
        let ee = forward_kinematics(&ModelParams::reference(), &reference_initial()).end_effector;
        assert!((ee - Vector2::new(3.6, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reference_momenta() {
        let p = ModelParams::reference();
        let m = brute_force_momentum(&p, &reference_initial());
        assert!((m.angular_about_cm - -1.6467).abs() < 1e-3, "{}", m.angular_about_cm);
        let v0 = m.cm_velocity(&p);
        assert!((v0 - Vector2::new(0.0988, 0.0943)).amax() < 1e-3, "{v0}");
    }

    #[test]
    fn zero_velocity_has_zero_momentum() {
        let p = ModelParams::reference();
        let s = SystemState::at_rest(0.3, Vector2::new(1.0, -2.0), Vector3::new(0.1, 0.2, 0.3));
        let m = brute_force_momentum(&p, &s);
        assert_eq!(m.linear, Vector2::zeros());
        assert_eq!(m.angular_about_cm, 0.0);
    }

    #[test]
    fn base_velocity_direct_formula() {
        let p = ModelParams::reference();
        let s = reference_initial();
        let m = MomentumPair { linear: Vector2::zeros(), angular_about_cm: 2.5 };
        let (w, _) = base_velocity_from_momentum(&p, &s, &Vector3::zeros(), &m).unwrap();
        let hb = coupling_matrices(&p, &s).hb_bar;
        assert!((w - 2.5 / hb).abs() < 1e-15);

        let (w0, v0) =
            base_velocity_from_momentum(&p, &s, &Vector3::zeros(), &MomentumPair::zero()).unwrap();
        assert_eq!(w0, 0.0);
        assert!(v0.norm() < 1e-15);
    }

    #[test]
    fn rejects_wrong_body_count_and_bad_values() {
        let b = ModelParams::reference().bodies()[0];
        assert!(ModelParams::from_slice(&[b, b, b]).is_err());
        let mut bad = *ModelParams::reference().bodies();
        bad[2].mass = 0.0;
        assert!(ModelParams::new(bad).is_err());
        bad[2].mass = 1.0;
        bad[1].l = -0.1;
        assert!(ModelParams::new(bad).is_err());
    }
}
