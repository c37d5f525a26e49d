//! Fixed-step closed loop under an ideal joint-velocity servo.
//!
//! Each tick: the controller produces `phi_dot_cmd` from the current pose and
//! estimates, the servo realizes it exactly, the base velocities follow from
//! the conserved momenta, the estimators consume the tick's signals, and the
//! pose is advanced one RK4 step with the command held.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{SVector, Vector2, Vector3};

use crate::adapt::{update_dynamic, update_kinematic, Guard, GuardConfig, ParamEstimate};
use crate::control::{
    control_attitude_only, control_full, signal_y1, signal_y2, sliding_attitude,
    sliding_task, ControlOutput, EstimatedModel, GainSet, TaskReference,
};
use crate::error::{Error, Result};
use crate::model::{
    base_velocity_from_momentum, brute_force_momentum, end_effector_velocity, forward_kinematics,
    system_cm, with_resolved_base, ModelParams, MomentumPair, SystemState,
};
use crate::regressor::{dyn_regressor, kin_regressor, true_params};
use crate::trace::{SimTrace, TraceRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ControllerMode {
    /// Attitude regulation only, with a prescribed null-space input.
    AttitudeOnly,
    /// Attitude regulation and end-effector tracking with momentum estimates.
    Full,
    /// As `Full`, but `p0_hat` and `v0_hat` pinned at zero.
    ZeroMomenta,
    /// As `Full`, using the exact parameters and no adaptation.
    TrueParams,
}

impl ControllerMode {
    pub const ALL: [ControllerMode; 4] =
        [Self::AttitudeOnly, Self::Full, Self::ZeroMomenta, Self::TrueParams];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AttitudeOnly => "attitude-only",
            Self::Full => "full",
            Self::ZeroMomenta => "zero-momenta",
            Self::TrueParams => "true-params",
        }
    }
}

impl fmt::Display for ControllerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown controller mode '{s}' (expected attitude-only|full|zero-momenta|true-params)"))
    }
}

/// How the joint-rate command behaves between control ticks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CommandHold {
    /// Command computed once per tick and held across the step.
    #[default]
    ZeroOrder,
    /// Command re-evaluated at every integrator stage, estimates held.
    Continuous,
}

impl CommandHold {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ZeroOrder => "zero-order",
            Self::Continuous => "continuous",
        }
    }
}

impl FromStr for CommandHold {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Self::ZeroOrder, Self::Continuous]
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| format!("unknown command hold '{s}' (expected zero-order|continuous)"))
    }
}

/// Circle `center + radius (cos(rate t), sin(rate t))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySpec {
    pub center: Vector2<f64>,
    pub radius: f64,
    pub rate: f64,
}

impl TrajectorySpec {
    pub fn reference() -> Self {
        Self { center: Vector2::new(3.7, 0.2), radius: 0.3, rate: std::f64::consts::PI }
    }

    /// Position and velocity at `t`.
    pub fn eval(&self, t: f64) -> (Vector2<f64>, Vector2<f64>) {
        let (s, c) = (self.rate * t).sin_cos();
        (
            self.center + self.radius * Vector2::new(c, s),
            self.radius * self.rate * Vector2::new(-s, c),
        )
    }
}

/// Null-space input for the attitude-only law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZetaSpec {
    /// Three phase-shifted sinusoids, rad/s.
    Smooth { amplitude: f64, frequency: f64 },
    /// `-gain (phi - phi_ref)`
    JointCentering { gain: f64, phi_ref: Vector3<f64> },
}

impl ZetaSpec {
    pub fn eval(&self, t: f64, phi: &Vector3<f64>) -> Vector3<f64> {
        match *self {
            ZetaSpec::Smooth { amplitude, frequency } => Vector3::from_fn(|i, _| {
                amplitude * (frequency * t + TAU * i as f64 / 3.0).sin()
            }),
            ZetaSpec::JointCentering { gain, phi_ref } => -gain * (phi - phi_ref),
        }
    }
}

impl Default for ZetaSpec {
    fn default() -> Self {
        ZetaSpec::Smooth { amplitude: 0.2, frequency: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub model: ModelParams,
    /// Initial pose and velocities; the velocities fix the conserved momenta.
    pub initial: SystemState,
    pub gains: GainSet,
    pub initial_estimates: ParamEstimate,
    pub guard: GuardConfig,
    pub trajectory: TrajectorySpec,
    pub zeta: ZetaSpec,
    pub theta_bd: f64,
    pub dt: f64,
    pub duration: f64,
    pub mode: ControllerMode,
    pub hold: CommandHold,
}

impl Scenario {
    /// The 3-DOF reference experiment with the combined controller.
    pub fn reference() -> Self {
        use std::f64::consts::PI;
        Self {
            model: ModelParams::reference(),
            initial: SystemState {
                theta_b: 0.0,
                base_cm_pos: Vector2::zeros(),
                phi: Vector3::new(PI / 3.0, -2.0 * PI / 3.0, PI / 3.0),
                omega_b: -0.05,
                base_cm_vel: Vector2::new(0.1, 0.1),
                phi_dot: Vector3::new(0.05, -0.01, 0.09),
            },
            gains: GainSet::reference(),
            initial_estimates: ParamEstimate::reference(),
            guard: GuardConfig::default(),
            trajectory: TrajectorySpec::reference(),
            zeta: ZetaSpec::default(),
            theta_bd: 0.0,
            dt: 0.002,
            duration: 20.0,
            mode: ControllerMode::Full,
            hold: CommandHold::ZeroOrder,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidScenario(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "duration must be non-negative, got {}",
                self.duration
            )));
        }
        if !(self.trajectory.radius >= 0.0)
            || !self.trajectory.rate.is_finite()
            || !self.trajectory.center.iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidScenario("trajectory must be finite with radius >= 0".into()));
        }
        if !self.initial.is_finite() || !self.theta_bd.is_finite() {
            return Err(Error::InvalidScenario("initial state must be finite".into()));
        }
        Ok(())
    }

    /// Number of integration steps; the trace holds one more row.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Momenta fixed by the initial state.
    pub fn momenta(&self) -> MomentumPair {
        brute_force_momentum(&self.model, &self.initial)
    }
}

/// Advances the pose by one RK4 step with `phi_dot` held constant; the base
/// velocities are re-resolved from `momenta` at every stage. The returned
/// state carries velocities consistent with its pose.
pub fn integrate(
    params: &ModelParams,
    state: &SystemState,
    phi_dot: &Vector3<f64>,
    momenta: &MomentumPair,
    dt: f64,
) -> Result<SystemState> {
    integrate_with(params, state, momenta, dt, |_, _| Ok(*phi_dot))
}

/// As [`integrate`], with the joint rates supplied per stage by
/// `joint_rates(tau, pose)`, `tau` being the offset into the step.
pub fn integrate_with<F>(
    params: &ModelParams,
    state: &SystemState,
    momenta: &MomentumPair,
    dt: f64,
    mut joint_rates: F,
) -> Result<SystemState>
where
    F: FnMut(f64, &SystemState) -> Result<Vector3<f64>>,
{
    type Pose = SVector<f64, 6>;
    let pack = |s: &SystemState| {
        Pose::from_column_slice(&[s.theta_b, s.base_cm_pos.x, s.base_cm_pos.y, s.phi[0], s.phi[1], s.phi[2]])
    };
    let unpack = |p: &Pose| SystemState {
        theta_b: p[0],
        base_cm_pos: Vector2::new(p[1], p[2]),
        phi: Vector3::new(p[3], p[4], p[5]),
        ..*state
    };
    let mut rates = |tau: f64, p: &Pose| -> Result<Pose> {
        let pose = unpack(p);
        let phi_dot = joint_rates(tau, &pose)?;
        let (w, v) = base_velocity_from_momentum(params, &pose, &phi_dot, momenta)?;
        Ok(Pose::from_column_slice(&[w, v.x, v.y, phi_dot[0], phi_dot[1], phi_dot[2]]))
    };

    let p0 = pack(state);
    let k1 = rates(0.0, &p0)?;
    let k2 = rates(0.5 * dt, &(p0 + k1 * (0.5 * dt)))?;
    let k3 = rates(0.5 * dt, &(p0 + k2 * (0.5 * dt)))?;
    let k4 = rates(dt, &(p0 + k3 * dt))?;
    let p1 = p0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    if !p1.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalDivergence { t: f64::NAN });
    }
    let end = unpack(&p1);
    let phi_dot = joint_rates(dt, &end)?;
    with_resolved_base(params, &end, &phi_dot, momenta)
}

/// Stepping closed-loop simulator.
#[derive(Clone, Debug)]
pub struct Simulator {
    scenario: Scenario,
    momenta: MomentumPair,
    initial_cm: Vector2<f64>,
    state: SystemState,
    estimate: ParamEstimate,
    guard: Guard,
    step: usize,
    steps: usize,
    finished: bool,
}

impl Simulator {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let momenta = scenario.momenta();
        let estimate = match scenario.mode {
            ControllerMode::TrueParams => {
                let (d, k) = true_params(&scenario.model, &momenta);
                let mut e = scenario.initial_estimates.clone().without_adaptation();
                e.dynamic = d;
                e.kinematic = k;
                e
            }
            ControllerMode::ZeroMomenta => scenario.initial_estimates.clone().with_frozen_momenta(),
            _ => scenario.initial_estimates.clone(),
        };
        let initial_cm = system_cm(&scenario.model, &scenario.initial);
        let steps = scenario.steps();
        Ok(Self {
            state: scenario.initial,
            guard: Guard::new(scenario.guard),
            momenta,
            initial_cm,
            estimate,
            step: 0,
            steps,
            finished: false,
            scenario,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn estimate(&self) -> &ParamEstimate {
        &self.estimate
    }

    pub fn momenta(&self) -> &MomentumPair {
        &self.momenta
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scenario.dt
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Emits the row for the current time and, unless this is the final
    /// row, advances estimates and pose. Returns `None` once finished.
    pub fn step(&mut self) -> Result<Option<TraceRow>> {
        if self.finished {
            return Ok(None);
        }
        let t = self.time();
        self.tick(t).map(Some).map_err(|e| Error::AtTime { t, source: Box::new(e) })
    }

    fn tick(&mut self, t: f64) -> Result<TraceRow> {
        let sc = &self.scenario;
        let model = &sc.model;
        let est = EstimatedModel::new(
            &self.estimate.dynamic,
            &self.estimate.kinematic,
            self.state.theta_b,
            &self.state.phi,
        );
        let x = forward_kinematics(model, &self.state).end_effector;
        let (x_d, x_d_dot) = sc.trajectory.eval(t);
        let task = TaskReference { x, x_d, x_d_dot };

        let out = command(sc, &self.state, &est, &task, t)?;
        if !out.phi_dot_cmd.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalDivergence { t });
        }

        // ideal servo
        let measured = with_resolved_base(model, &self.state, &out.phi_dot_cmd, &self.momenta)?;
        let x_dot = end_effector_velocity(model, &measured);
        let dx = task.error();
        let dx_dot = x_dot - x_d_dot;
        let y1 = signal_y1(&measured, &est, &out.phi_dot_cmd, &sc.gains, sc.theta_bd);
        let y2 = signal_y2(&measured, &est, &out.phi_dot_cmd, &task, &x_dot, &sc.gains);

        let oracle = brute_force_momentum(model, &measured);
        let p_scale = self.momenta.angular_about_cm.abs().max(1.0);
        let l_scale = self.momenta.linear.norm().max(1.0);
        let cm_expected = self.initial_cm + self.momenta.cm_velocity(model) * t;

        let row = TraceRow {
            t,
            theta_b: measured.theta_b,
            attitude_error: wrapped_attitude_error(measured.theta_b, sc.theta_bd),
            omega_b: measured.omega_b,
            phi: measured.phi,
            phi_dot_cmd: out.phi_dot_cmd,
            x,
            x_d,
            dx,
            dx_dot,
            s_b: sliding_attitude(measured.omega_b, measured.theta_b, sc.theta_bd, sc.gains.lambda_b),
            s_x: sliding_task(&dx, &dx_dot, &sc.gains.lambda_x),
            y1,
            y2,
            a_d_hat: self.estimate.dynamic.0,
            a_k_hat: self.estimate.kinematic.0,
            hb_hat: est.hb,
            momentum_drift: (oracle.angular_about_cm - self.momenta.angular_about_cm).abs() / p_scale,
            linear_momentum_drift: (oracle.linear - self.momenta.linear).norm() / l_scale,
            cm_drift: (system_cm(model, &measured) - cm_expected).norm(),
            guard_hb: self.guard.counters().base_inertia,
            guard_hbm: self.guard.counters().coupling,
        };

        if self.step >= self.steps {
            self.state = measured;
            self.finished = true;
            return Ok(row);
        }

        let dt = sc.dt;
        let mut next = update_dynamic(&self.estimate, &dyn_regressor(&measured), y1, dt);
        if sc.mode != ControllerMode::AttitudeOnly {
            next = update_kinematic(&next, &kin_regressor(&measured), &y2, dt);
        }
        let stepped = match sc.hold {
            CommandHold::ZeroOrder => integrate(model, &measured, &out.phi_dot_cmd, &self.momenta, dt),
            CommandHold::Continuous => {
                let held = &self.estimate;
                integrate_with(model, &measured, &self.momenta, dt, |tau, pose| {
                    let est = EstimatedModel::new(&held.dynamic, &held.kinematic, pose.theta_b, &pose.phi);
                    let (x_d, x_d_dot) = sc.trajectory.eval(t + tau);
                    let x = forward_kinematics(model, pose).end_effector;
                    let task = TaskReference { x, x_d, x_d_dot };
                    Ok(command(sc, pose, &est, &task, t + tau)?.phi_dot_cmd)
                })
            }
        };
        let new_state = stepped
            .map_err(|e| match e {
                Error::NumericalDivergence { .. } => Error::NumericalDivergence { t },
                other => other,
            })?;
        if !new_state.is_finite() || !next.dynamic.is_finite() || !next.kinematic.is_finite() {
            return Err(Error::NumericalDivergence { t });
        }
        self.estimate = if next.adaptation_enabled() {
            self.guard.apply(&next, new_state.theta_b, &new_state.phi)
        } else {
            next
        };
        self.state = new_state;
        self.step += 1;
        Ok(row)
    }
}

fn command(
    sc: &Scenario,
    state: &SystemState,
    est: &EstimatedModel,
    task: &TaskReference,
    t: f64,
) -> Result<ControlOutput> {
    match sc.mode {
        ControllerMode::AttitudeOnly => {
            let zeta = sc.zeta.eval(t, &state.phi);
            control_attitude_only(state, est, &zeta, &sc.gains, sc.theta_bd)
        }
        _ => control_full(state, est, task, &sc.gains, sc.theta_bd),
    }
}

/// Runs a scenario to completion.
pub fn run(scenario: &Scenario) -> Result<SimTrace> {
    let mut sim = Simulator::new(scenario.clone())?;
    let mut rows = Vec::with_capacity(sim.steps + 1);
    while let Some(row) = sim.step()? {
        rows.push(row);
    }
    Ok(SimTrace {
        mode: scenario.mode,
        dt: scenario.dt,
        theta_bd: scenario.theta_bd,
        momenta: sim.momenta,
        rows,
    })
}

/// `theta_b - theta_bd` wrapped to (-pi, pi], for reporting only.
pub fn wrapped_attitude_error(theta_b: f64, theta_bd: f64) -> f64 {
    let d = theta_b - theta_bd;
    let w = d.rem_euclid(TAU);
    if w > std::f64::consts::PI {
        w - TAU
    } else {
        w
    }
}
