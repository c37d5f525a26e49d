mod common;

use std::f64::consts::PI;

use nalgebra::{Matrix3, RowVector3, Vector2, Vector3};
use proptest::prelude::*;

use common::{oracle, random_state, rng};
use rnsadapt::control::{
    attitude_error, control_attitude_only, control_full, rns_projector, signal_y1, EstimatedModel,
    GainSet, TaskReference,
};
use rnsadapt::model::forward_kinematics;
use rnsadapt::{Error, Scenario, Simulator};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn projector_properties(h in prop::array::uniform3(-50.0..50.0f64)) {
        let h = RowVector3::from(h);
        prop_assume!(h.norm() > 1e-3);
        let t = rns_projector(&h, 1e-8).unwrap();
        prop_assert!((t * t - t).amax() < 1e-12);
        prop_assert!((t - t.transpose()).amax() < 1e-12);
        prop_assert!((h * t).amax() < 1e-12 * h.norm());
        prop_assert!((t.trace() - 2.0).abs() < 1e-12);
        // eigenvalues are {0, 1, 1}
        let mut ev: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        prop_assert!(ev[0].abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12 && (ev[2] - 1.0).abs() < 1e-12);
    }

    /// Whatever the null-space input, the estimated coupling sees only the
    /// attitude term.
    #[test]
    fn zeta_is_invisible_to_coupling(z in prop::array::uniform3(-10.0..10.0f64), seed in 0u64..1000) {
        let mut r = rng(seed);
        let s = random_state(&mut r);
        let sc = Scenario::reference();
        let est = EstimatedModel::new(&sc.initial_estimates.dynamic, &sc.initial_estimates.kinematic, s.theta_b, &s.phi);
        let gains = GainSet::reference();
        let a = control_attitude_only(&s, &est, &Vector3::from(z), &gains, 0.3).unwrap();
        let b = control_attitude_only(&s, &est, &Vector3::zeros(), &gains, 0.3).unwrap();
        let scale = est.hbm.norm() * (a.phi_dot_cmd.norm() + b.phi_dot_cmd.norm());
        prop_assert!(((est.hbm * (a.phi_dot_cmd - b.phi_dot_cmd))[0]).abs() < 1e-12 * scale.max(1.0));
    }
}

#[test]
fn projector_rejects_vanishing_coupling() {
    let err = rns_projector(&RowVector3::new(1e-10, 0.0, 0.0), 1e-8).unwrap_err();
    assert!(matches!(err, Error::RankDeficientCoupling { .. }));
    assert_eq!(rns_projector(&RowVector3::new(0.0, 0.0, 2.0), 1e-8).unwrap()[(2, 2)], 0.0);
    assert_eq!(rns_projector(&RowVector3::new(0.0, 0.0, 2.0), 1e-8).unwrap()[(0, 0)], 1.0);
    let _ = Matrix3::<f64>::identity();
}

#[test]
fn attitude_error_is_half_angle_sine() {
    assert_eq!(attitude_error(0.4, 0.4), 0.0);
    assert!((attitude_error(PI, 0.0) - 1.0).abs() < 1e-15);
    assert!((attitude_error(-0.2, 0.0) + 0.1f64.sin()).abs() < 1e-15);
}

/// A task Jacobian without row rank is reported, not inverted.
#[test]
fn singular_task_jacobian_is_reported() {
    let sc = Scenario::reference();
    let mut s = sc.initial;
    // arm folded straight: all link directions parallel
    s.phi = Vector3::zeros();
    let m = &sc.model;
    let o = oracle(m, &s);
    let momenta = rnsadapt::MomentumPair { linear: o.linear, angular_about_cm: o.angular };
    let (d, k) = rnsadapt::regressor::true_params(m, &momenta);
    let est = EstimatedModel::new(&d, &k, s.theta_b, &s.phi);
    let x = forward_kinematics(m, &s).end_effector;
    let task = TaskReference { x, x_d: x + Vector2::new(0.0, 0.1), x_d_dot: Vector2::zeros() };
    let err = control_full(&s, &est, &task, &GainSet::reference(), 0.0).unwrap_err();
    assert!(matches!(err, Error::DynamicSingularity { .. }), "{err:?}");
}

/// The two premultiplied control-law identities hold at every tick of the
/// reference run, and the command the simulator applies is the one the
/// control law gives for its state and estimates.
#[test]
fn identity_ladder_along_reference_run() {
    let sc = Scenario { duration: 4.0, ..Scenario::reference() };
    let mut sim = Simulator::new(sc.clone()).unwrap();
    let gains = sc.gains;
    let mut ticks = 0;
    loop {
        let t = sim.time();
        let s = *sim.state();
        let e = sim.estimate().clone();
        let Some(row) = sim.step().unwrap() else { break };
        let est = EstimatedModel::new(&e.dynamic, &e.kinematic, s.theta_b, &s.phi);
        let (x_d, x_d_dot) = sc.trajectory.eval(t);
        let task = TaskReference { x: row.x, x_d, x_d_dot };
        let out = control_full(&s, &est, &task, &gains, sc.theta_bd).unwrap();
        assert_eq!(out.phi_dot_cmd, row.phi_dot_cmd);
        let cmd = out.phi_dot_cmd;
        let d_eps = attitude_error(s.theta_b, sc.theta_bd);
        let rhs = est.p0 + est.hb * gains.lambda_b * d_eps;
        assert!(((est.hbm * cmd)[0] - rhs).abs() <= 1e-12 * (est.hbm.norm() * cmd.norm()).max(1.0));
        let rhs = x_d_dot - gains.lambda_x * (row.x - x_d) - est.v0;
        assert!((est.jm * cmd - rhs).norm() <= 1e-12 * (est.jm.norm() * cmd.norm()).max(1.0));
        // under the ideal servo y1 reduces to Hb_hat * s_b
        let mut measured = s;
        measured.omega_b = row.omega_b;
        measured.phi_dot = cmd;
        let y1 = signal_y1(&measured, &est, &cmd, &gains, sc.theta_bd);
        assert!((y1 - est.hb * row.s_b).abs() <= 1e-12 * est.hb.abs() * row.s_b.abs().max(1.0));
        assert_eq!(y1, row.y1);
        ticks += 1;
    }
    assert_eq!(ticks, 2001);
}
