//! Scenario files and built-in presets.
//!
//! Scenario files are TOML with units spelled out in every key. Any section
//! or key left out falls back to the reference scenario, so a file only needs
//! to list what it changes.
//!
//! ```toml
//! [run]
//! mode = "full"            # attitude-only | full | zero-momenta | true-params
//! dt_s = 0.002
//! duration_s = 20.0
//! theta_bd_rad = 0.0
//! hold = "zero-order"      # or "continuous"
//!
//! [[model.bodies]]         # exactly four, spacecraft first
//! mass_kg = 61.2
//! inertia_kg_m2 = 26.112
//! l_m = 0.8
//! r_m = 0.8
//!
//! [initial]
//! theta_b_rad = 0.0
//! base_cm_pos_m = [0.0, 0.0]
//! phi_rad = [1.0471975511965976, -2.0943951023931953, 1.0471975511965976]
//! omega_b_rad_per_s = -0.05
//! base_cm_vel_m_per_s = [0.1, 0.1]
//! phi_dot_rad_per_s = [0.05, -0.01, 0.09]
//!
//! [gains]
//! lambda_b_per_s = 60.0
//! lambda_x_per_s = [[20.0, 0.0], [0.0, 20.0]]
//! rank_tol = 1e-8
//!
//! [estimator]
//! a_d_hat0 = [30, 20, 3, 3, 3, 5, 100, 60, 30, 2, 0]
//! a_k_hat0 = [2, 3, 3, 3, 0, 0]
//! gamma_d_diag = [30, 30, 10, 10, 10, 10, 10, 10, 10, 10, 1]
//! gamma_k_diag = [20, 20, 20, 20, 2, 2]
//! adaptation = true
//! h_min_kg_m2 = 1.0
//! c_min_kg_m2 = 1e-3
//!
//! [trajectory]
//! center_m = [3.7, 0.2]
//! radius_m = 0.3
//! rate_rad_per_s = 3.141592653589793
//!
//! [zeta]                   # attitude-only mode
//! kind = "smooth"          # or "centering" with gain_per_s / phi_ref_rad
//! amplitude_rad_per_s = 0.2
//! frequency_rad_per_s = 1.0
//! ```

use std::path::Path;

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::Deserialize;

use crate::adapt::{GuardConfig, ParamEstimate};
use crate::control::GainSet;
use crate::error::{Error, Result};
use crate::model::{BodyParams, ModelParams, SystemState};
use crate::regressor::{DynParams, KinParams, DYN_LEN, KIN_LEN};
use crate::sim::{CommandHold, ControllerMode, Scenario, TrajectorySpec, ZetaSpec};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub run: RunSection,
    pub model: Option<ModelSection>,
    pub initial: Option<InitialSection>,
    pub gains: Option<GainsSection>,
    pub estimator: Option<EstimatorSection>,
    pub trajectory: Option<TrajectorySection>,
    pub zeta: Option<ZetaSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Option<String>,
    pub dt_s: Option<f64>,
    pub duration_s: Option<f64>,
    pub theta_bd_rad: Option<f64>,
    pub hold: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub bodies: Vec<BodySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySection {
    pub mass_kg: f64,
    pub inertia_kg_m2: f64,
    pub l_m: f64,
    pub r_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub theta_b_rad: f64,
    pub base_cm_pos_m: [f64; 2],
    pub phi_rad: [f64; 3],
    pub omega_b_rad_per_s: f64,
    pub base_cm_vel_m_per_s: [f64; 2],
    pub phi_dot_rad_per_s: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub lambda_b_per_s: f64,
    pub lambda_x_per_s: [[f64; 2]; 2],
    pub rank_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub a_d_hat0: Option<Vec<f64>>,
    pub a_k_hat0: Option<Vec<f64>>,
    pub gamma_d_diag: Option<Vec<f64>>,
    pub gamma_k_diag: Option<Vec<f64>>,
    pub adaptation: Option<bool>,
    pub h_min_kg_m2: Option<f64>,
    pub c_min_kg_m2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub center_m: [f64; 2],
    pub radius_m: f64,
    pub rate_rad_per_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ZetaSection {
    Smooth { amplitude_rad_per_s: f64, frequency_rad_per_s: f64 },
    Centering { gain_per_s: f64, phi_ref_rad: [f64; 3] },
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidScenario(msg.into())
}

fn exact<const N: usize>(v: &[f64], what: &str) -> Result<[f64; N]> {
    v.try_into()
        .map_err(|_| invalid(format!("{what} needs {N} entries, got {}", v.len())))
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    /// Overlays this file on the reference scenario.
    pub fn into_scenario(self) -> Result<Scenario> {
        let mut sc = Scenario::reference();
        if let Some(mode) = &self.run.mode {
            sc.mode = mode.parse().map_err(invalid)?;
        }
        if let Some(hold) = &self.run.hold {
            sc.hold = hold.parse().map_err(invalid)?;
        }
        if let Some(dt) = self.run.dt_s {
            sc.dt = dt;
        }
        if let Some(d) = self.run.duration_s {
            sc.duration = d;
        }
        if let Some(t) = self.run.theta_bd_rad {
            sc.theta_bd = t;
        }
        if let Some(m) = &self.model {
            let bodies: Vec<BodyParams> = m
                .bodies
                .iter()
                .map(|b| BodyParams::new(b.mass_kg, b.inertia_kg_m2, b.l_m, b.r_m))
                .collect();
            sc.model = ModelParams::from_slice(&bodies)?;
        }
        if let Some(i) = &self.initial {
            sc.initial = SystemState {
                theta_b: i.theta_b_rad,
                base_cm_pos: Vector2::from(i.base_cm_pos_m),
                phi: Vector3::from(i.phi_rad),
                omega_b: i.omega_b_rad_per_s,
                base_cm_vel: Vector2::from(i.base_cm_vel_m_per_s),
                phi_dot: Vector3::from(i.phi_dot_rad_per_s),
            };
        }
        if let Some(g) = &self.gains {
            let l = g.lambda_x_per_s;
            sc.gains = GainSet::new(
                g.lambda_b_per_s,
                Matrix2::new(l[0][0], l[0][1], l[1][0], l[1][1]),
                g.rank_tol.unwrap_or(sc.gains.rank_tol),
            )?;
        }
        if let Some(e) = &self.estimator {
            let base = ParamEstimate::reference();
            let dynamic = match &e.a_d_hat0 {
                Some(v) => DynParams::from_slice(v)
                    .ok_or_else(|| invalid(format!("a_d_hat0 needs {DYN_LEN} entries")))?,
                None => base.dynamic,
            };
            let kinematic = match &e.a_k_hat0 {
                Some(v) => KinParams::from_slice(v)
                    .ok_or_else(|| invalid(format!("a_k_hat0 needs {KIN_LEN} entries")))?,
                None => base.kinematic,
            };
            let gd: [f64; DYN_LEN] = match &e.gamma_d_diag {
                Some(v) => exact(v, "gamma_d_diag")?,
                None => std::array::from_fn(|i| base.gamma_d()[(i, i)]),
            };
            let gk: [f64; KIN_LEN] = match &e.gamma_k_diag {
                Some(v) => exact(v, "gamma_k_diag")?,
                None => std::array::from_fn(|i| base.gamma_k()[(i, i)]),
            };
            let mut est = ParamEstimate::from_diagonals(dynamic, kinematic, &gd, &gk)?;
            if e.adaptation == Some(false) {
                est = est.without_adaptation();
            }
            sc.initial_estimates = est;
            sc.guard = GuardConfig {
                h_min: e.h_min_kg_m2.unwrap_or(sc.guard.h_min),
                c_min: e.c_min_kg_m2.unwrap_or(sc.guard.c_min),
            };
        }
        if let Some(t) = &self.trajectory {
            sc.trajectory = TrajectorySpec {
                center: Vector2::from(t.center_m),
                radius: t.radius_m,
                rate: t.rate_rad_per_s,
            };
        }
        if let Some(z) = &self.zeta {
            sc.zeta = match *z {
                ZetaSection::Smooth { amplitude_rad_per_s, frequency_rad_per_s } => ZetaSpec::Smooth {
                    amplitude: amplitude_rad_per_s,
                    frequency: frequency_rad_per_s,
                },
                ZetaSection::Centering { gain_per_s, phi_ref_rad } => ZetaSpec::JointCentering {
                    gain: gain_per_s,
                    phi_ref: Vector3::from(phi_ref_rad),
                },
            };
        }
        sc.validate()?;
        Ok(sc)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    ScenarioFile::parse(text)?.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_scenario(&text).map_err(|e| Error::Config { path: path.to_path_buf(), message: e.to_string() })
}

/// Named experiment setups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Combined controller vs. the zero-momenta variant.
    Comparison,
    /// Combined controller alone.
    Reference,
    /// Attitude-only law with a bounded null-space input.
    Theorem1,
    /// Exact parameters, zero momenta, attitude at target.
    ZeroReaction,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Self::Comparison, Self::Reference, Self::Theorem1, Self::ZeroReaction];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Comparison => "paper-fig2-4",
            Self::Reference => "reference",
            Self::Theorem1 => "theorem1",
            Self::ZeroReaction => "zero-reaction",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// The scenarios this preset runs, labelled.
    pub fn scenarios(&self) -> Vec<(&'static str, Scenario)> {
        match self {
            Self::Comparison => {
                let full = Scenario::reference();
                let zero = Scenario { mode: ControllerMode::ZeroMomenta, ..full.clone() };
                vec![("nonzero-momenta", full), ("zero-momenta", zero)]
            }
            Self::Reference => vec![("full", Scenario::reference())],
            Self::Theorem1 => vec![("attitude-only", theorem1_scenario())],
            Self::ZeroReaction => vec![("true-params", zero_reaction_scenario())],
        }
    }
}

pub fn theorem1_scenario() -> Scenario {
    Scenario { mode: ControllerMode::AttitudeOnly, ..Scenario::reference() }
}

pub fn zero_reaction_scenario() -> Scenario {
    let mut sc = Scenario::reference();
    sc.mode = ControllerMode::TrueParams;
    sc.hold = CommandHold::Continuous;
    sc.initial = SystemState::at_rest(0.0, Vector2::zeros(), sc.initial.phi);
    sc.duration = 10.0;
    sc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference() {
        assert_eq!(parse_scenario("").unwrap(), Scenario::reference());
    }

    #[test]
    fn overrides_apply() {
        let sc = parse_scenario(
            r#"
            [run]
            mode = "zero-momenta"
            dt_s = 0.001
            duration_s = 3.0

            [trajectory]
            center_m = [3.5, 0.0]
            radius_m = 0.1
            rate_rad_per_s = 1.0

            [zeta]
            kind = "centering"
            gain_per_s = 2.0
            phi_ref_rad = [0.5, -1.0, 0.5]
            "#,
        )
        .unwrap();
        assert_eq!(sc.mode, ControllerMode::ZeroMomenta);
        assert_eq!(sc.dt, 0.001);
        assert_eq!(sc.trajectory.radius, 0.1);
        assert!(matches!(sc.zeta, ZetaSpec::JointCentering { gain, .. } if gain == 2.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_scenario("[run]\nmode = \"fast\"").is_err());
        assert!(parse_scenario("[run]\ndt = 0.1").is_err());
        assert!(parse_scenario("[estimator]\na_d_hat0 = [1.0, 2.0]").is_err());
        assert!(parse_scenario("[gains]\nlambda_b_per_s = -1.0\nlambda_x_per_s = [[1.0,0.0],[0.0,1.0]]").is_err());
        let three = "[[model.bodies]]\nmass_kg=1.0\ninertia_kg_m2=1.0\nl_m=0.1\nr_m=0.1\n".repeat(3);
        assert!(parse_scenario(&three).is_err());
    }

    #[test]
    fn missing_file_reports_path() {
        let p = Path::new("/definitely/not/here.toml");
        match load_scenario(p) {
            Err(Error::Config { path, .. }) => assert_eq!(path, p),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
        }
        assert_eq!(Preset::from_name("nope"), None);
    }
}
