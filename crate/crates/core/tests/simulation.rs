use nalgebra::Vector3;

use rnsadapt::adapt::GuardConfig;
use rnsadapt::model::SystemState;
use rnsadapt::regressor::true_params;
use rnsadapt::scenario::{theorem1_scenario, Preset};
use rnsadapt::sim::{CommandHold, ZetaSpec};
use rnsadapt::{run, ControllerMode, Error, Scenario, Simulator, Summary};

fn short(duration: f64) -> Scenario {
    Scenario { duration, ..Scenario::reference() }
}

#[test]
fn runs_are_deterministic() {
    let sc = short(2.0);
    assert_eq!(run(&sc).unwrap(), run(&sc).unwrap());
}

#[test]
fn trace_layout() {
    let tr = run(&short(1.0)).unwrap();
    assert_eq!(tr.rows.len(), 501);
    assert_eq!(tr.rows[0].t, 0.0);
    assert!((tr.last().t - 1.0).abs() < 1e-12);
    assert_eq!(tr.rows[0].a_d_hat, Scenario::reference().initial_estimates.dynamic.0);
    let d0 = tr.rows[0].dx;
    assert!((d0.x + 0.4).abs() < 1e-12 && (d0.y + 0.2).abs() < 1e-12, "{d0}");
}

#[test]
fn stepping_past_the_end_yields_nothing() {
    let mut sim = Simulator::new(short(0.01)).unwrap();
    let mut n = 0;
    while sim.step().unwrap().is_some() {
        n += 1;
    }
    assert_eq!(n, 6);
    assert!(sim.is_finished());
    assert!(sim.step().unwrap().is_none());
}

#[test]
fn without_adaptation_tracking_does_not_converge() {
    let full = Summary::from_rows(&run(&short(10.0)).unwrap().rows);
    let mut sc = short(10.0);
    sc.initial_estimates = sc.initial_estimates.clone().without_adaptation();
    let frozen = Summary::from_rows(&run(&sc).unwrap().rows);
    assert!(frozen.steady_dx_norm > 10.0 * full.steady_dx_norm, "{frozen}\n{full}");
    assert_eq!(frozen.guard_triggers, 0);
}

#[test]
fn truth_initialized_estimates_stay_put() {
    let mut sc = short(5.0);
    let (d, k) = true_params(&sc.model, &sc.momenta());
    sc.initial_estimates.dynamic = d;
    sc.initial_estimates.kinematic = k;
    let tr = run(&sc).unwrap();
    for r in &tr.rows {
        assert!((r.a_d_hat - d.0).amax() < 1e-9);
        assert!((r.a_k_hat - k.0).amax() < 1e-9);
        assert!(r.y1.abs() < 1e-9 && r.y2.norm() < 1e-9);
    }
    let s = Summary::from_rows(&tr.rows);
    assert!(s.final_dx_norm < 1e-3, "{s}");
    assert!(s.final_abs_omega_b < 1e-4, "{s}");

    // with the command realized continuously only rounding remains
    let tr = run(&Scenario { hold: CommandHold::Continuous, ..sc }).unwrap();
    let s = Summary::from_rows(&tr.rows);
    assert!(s.final_dx_norm < 1e-9, "{s}");
    assert!(s.final_abs_omega_b < 1e-9, "{s}");
}

#[test]
fn attitude_only_law_regulates_attitude() {
    for theta_bd in [0.0, 0.1] {
        let sc = Scenario { theta_bd, ..theorem1_scenario() };
        let s = Summary::from_rows(&run(&sc).unwrap().rows);
        assert!(s.final_abs_omega_b < 1e-3, "{s}");
        assert!(s.final_abs_attitude_error < 1e-2, "{s}");
        assert!(s.y1_energy_ratio() < 0.05, "{s}");
    }
    let sc = Scenario {
        zeta: ZetaSpec::JointCentering { gain: 1.0, phi_ref: Vector3::new(0.8, -1.6, 0.8) },
        duration: 10.0,
        ..theorem1_scenario()
    };
    let s = Summary::from_rows(&run(&sc).unwrap().rows);
    assert!(s.final_abs_attitude_error < 1e-2, "{s}");
}

#[test]
fn zero_momenta_mode_keeps_momentum_estimates_at_zero() {
    let sc = Scenario { mode: ControllerMode::ZeroMomenta, ..short(2.0) };
    for r in run(&sc).unwrap().rows {
        assert_eq!(r.a_d_hat[10], 0.0);
        assert_eq!(r.a_k_hat[4], 0.0);
        assert_eq!(r.a_k_hat[5], 0.0);
    }
}

#[test]
fn hold_modes_agree_to_first_order() {
    let a = run(&short(2.0)).unwrap();
    let b = run(&Scenario { hold: CommandHold::Continuous, ..short(2.0) }).unwrap();
    let gap = a.rows.iter().zip(&b.rows).map(|(x, y)| (x.dx - y.dx).norm()).fold(0.0, f64::max);
    assert!(gap > 0.0 && gap < 1e-2, "{gap}");
}

#[test]
fn guard_repairs_a_bad_inertia_estimate() {
    let mut sc = short(2.0);
    // S_0 far below the couplings: Hb_hat starts negative
    sc.initial_estimates.dynamic.0[6] = -40.0;
    sc.guard = GuardConfig { h_min: 1.0, c_min: 1e-3 };
    let tr = run(&sc).unwrap();
    assert!(tr.rows[0].hb_hat < 0.0);
    assert!(tr.last().guard_hb > 0);
    for r in &tr.rows[1..] {
        assert!(r.hb_hat >= 1.0 - 1e-9, "t = {}: {}", r.t, r.hb_hat);
    }
}

#[test]
fn singular_start_reports_time() {
    let mut sc = short(1.0);
    sc.initial = SystemState { phi: Vector3::zeros(), ..sc.initial };
    sc.initial_estimates.kinematic = true_params(&sc.model, &sc.momenta()).1;
    let err = run(&sc).unwrap_err();
    match &err {
        Error::AtTime { t, .. } => assert_eq!(*t, 0.0),
        other => panic!("{other:?}"),
    }
    assert!(matches!(err.root(), Error::DynamicSingularity { .. }));
}

#[test]
fn presets_build_valid_scenarios() {
    for p in Preset::ALL {
        for (_, sc) in p.scenarios() {
            sc.validate().unwrap();
        }
    }
    let pair = Preset::Comparison.scenarios();
    assert_eq!(pair[0].1.mode, ControllerMode::Full);
    assert_eq!(pair[1].1.mode, ControllerMode::ZeroMomenta);
}
