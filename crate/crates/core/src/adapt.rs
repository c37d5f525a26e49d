//! Gradient estimators for the generalized parameters plus a minimal guard
//! keeping the estimated base inertia positive and the estimated coupling row
//! away from zero.

use nalgebra::{SMatrix, SVector, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::linalg::is_symmetric_positive_definite;
use crate::regressor::{
    inertia_from_params, DynParams, DynRegressor, KinParams, KinRegressor, DYN_LEN, KIN_LEN, N_DYN,
    N_KIN,
};

pub type GammaDyn = SMatrix<f64, DYN_LEN, DYN_LEN>;
pub type GammaKin = SMatrix<f64, KIN_LEN, KIN_LEN>;

#[derive(Clone, Debug, PartialEq)]
pub struct ParamEstimate {
    pub dynamic: DynParams,
    pub kinematic: KinParams,
    gamma_d: GammaDyn,
    gamma_k: GammaKin,
    momenta_frozen: bool,
    adaptation: bool,
}

impl ParamEstimate {
    pub fn new(dynamic: DynParams, kinematic: KinParams, gamma_d: GammaDyn, gamma_k: GammaKin) -> Result<Self> {
        if !is_symmetric_positive_definite(&gamma_d) {
            return Err(Error::InvalidGains("Gamma_d must be symmetric positive definite".into()));
        }
        if !is_symmetric_positive_definite(&gamma_k) {
            return Err(Error::InvalidGains("Gamma_k must be symmetric positive definite".into()));
        }
        if !dynamic.is_finite() || !kinematic.is_finite() {
            return Err(Error::InvalidGains("initial estimates must be finite".into()));
        }
        Ok(Self { dynamic, kinematic, gamma_d, gamma_k, momenta_frozen: false, adaptation: true })
    }

    pub fn from_diagonals(
        dynamic: DynParams,
        kinematic: KinParams,
        gamma_d: &[f64; DYN_LEN],
        gamma_k: &[f64; KIN_LEN],
    ) -> Result<Self> {
        Self::new(
            dynamic,
            kinematic,
            GammaDyn::from_diagonal(&SVector::from_column_slice(gamma_d)),
            GammaKin::from_diagonal(&SVector::from_column_slice(gamma_k)),
        )
    }

    /// Initial estimates and adaptation gains of the reference scenario.
    pub fn reference() -> Self {
        let dynamic = DynParams(SVector::from_column_slice(&[
            30.0, 20.0, 3.0, 3.0, 3.0, 5.0, 100.0, 60.0, 30.0, 2.0, 0.0,
        ]));
        let kinematic = KinParams(SVector::from_column_slice(&[2.0, 3.0, 3.0, 3.0, 0.0, 0.0]));
        Self::from_diagonals(
            dynamic,
            kinematic,
            &[30.0, 30.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 1.0],
            &[20.0, 20.0, 20.0, 20.0, 2.0, 2.0],
        )
        .expect("reference gains are positive definite")
    }

    /// `p0_hat` and `v0_hat` pinned at zero and never adapted.
    pub fn with_frozen_momenta(mut self) -> Self {
        self.dynamic.set_p0(0.0);
        self.kinematic.set_v0(Vector2::zeros());
        self.momenta_frozen = true;
        self
    }

    /// Estimates held constant (adaptation switched off).
    pub fn without_adaptation(mut self) -> Self {
        self.adaptation = false;
        self
    }

    pub fn momenta_frozen(&self) -> bool {
        self.momenta_frozen
    }

    pub fn adaptation_enabled(&self) -> bool {
        self.adaptation
    }

    pub fn gamma_d(&self) -> &GammaDyn {
        &self.gamma_d
    }

    pub fn gamma_k(&self) -> &GammaKin {
        &self.gamma_k
    }
}

/// Explicit Euler step of `d/dt a_d_hat = -Gamma_d Ybar_d^T y1`.
pub fn update_dynamic(est: &ParamEstimate, y_d: &DynRegressor, y1: f64, dt: f64) -> ParamEstimate {
    debug_assert!(dt > 0.0);
    let mut out = est.clone();
    if !est.adaptation {
        return out;
    }
    let mut delta = est.gamma_d * y_d.transpose() * (y1 * dt);
    if est.momenta_frozen {
        delta[N_DYN] = 0.0;
    }
    out.dynamic.0 -= delta;
    out
}

/// Explicit Euler step of `d/dt a_k_hat = -Gamma_k Ybar_k^T y2`.
pub fn update_kinematic(est: &ParamEstimate, y_k: &KinRegressor, y2: &Vector2<f64>, dt: f64) -> ParamEstimate {
    debug_assert!(dt > 0.0);
    let mut out = est.clone();
    if !est.adaptation {
        return out;
    }
    let mut delta = est.gamma_k * y_k.transpose() * y2 * dt;
    if est.momenta_frozen {
        delta[N_KIN] = 0.0;
        delta[N_KIN + 1] = 0.0;
    }
    out.kinematic.0 -= delta;
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuardConfig {
    /// kg m^2
    pub h_min: f64,
    /// kg m^2
    pub c_min: f64,
}

impl Default for GuardConfig {
    fn default() -> Self {
        Self { h_min: 1.0, c_min: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GuardCounters {
    pub base_inertia: u64,
    pub coupling: u64,
}

impl GuardCounters {
    pub fn total(&self) -> u64 {
        self.base_inertia + self.coupling
    }
}

// Entry of a_d that enters Hb with unit weight and nothing else.
const HB_OFFSET_INDEX: usize = 6;
// Entry of a_d that enters Hbm_3 with unit weight and nothing else.
const HBM3_OFFSET_INDEX: usize = 9;

/// Clamp guard applied after every estimator update.
#[derive(Clone, Debug, Default)]
pub struct Guard {
    pub config: GuardConfig,
    last_valid: Option<DynParams>,
    counters: GuardCounters,
}

impl Guard {
    pub fn new(config: GuardConfig) -> Self {
        Self { config, last_valid: None, counters: GuardCounters::default() }
    }

    pub fn counters(&self) -> GuardCounters {
        self.counters
    }

    /// Returns the repaired estimate. `theta_b` and `phi` are the pose at
    /// which the estimated matrices are checked.
    pub fn apply(&mut self, est: &ParamEstimate, theta_b: f64, phi: &Vector3<f64>) -> ParamEstimate {
        let mut out = est.clone();
        let (_, hbm) = inertia_from_params(&out.dynamic, theta_b, phi);
        if hbm.norm() < self.config.c_min {
            self.counters.coupling += 1;
            out.dynamic = self.restore_coupling(&out.dynamic, theta_b, phi);
        }
        let (hb, _) = inertia_from_params(&out.dynamic, theta_b, phi);
        if hb < self.config.h_min {
            self.counters.base_inertia += 1;
            out.dynamic.0[HB_OFFSET_INDEX] += self.config.h_min - hb;
        }
        if out.dynamic == est.dynamic {
            self.last_valid = Some(out.dynamic);
        }
        out
    }

    fn restore_coupling(&self, a: &DynParams, theta_b: f64, phi: &Vector3<f64>) -> DynParams {
        let c = self.config.c_min;
        let (_, h) = inertia_from_params(a, theta_b, phi);
        if let Some(last) = &self.last_valid {
            let (_, h_last) = inertia_from_params(last, theta_b, phi);
            if h_last.norm() >= c {
                // |h + s (h_last - h)|^2 = c^2, smallest s in [0, 1]
                let d = h_last - h;
                let qa = d.norm_squared();
                let qb = 2.0 * h.dot(&d);
                let qc = h.norm_squared() - c * c;
                let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
                let s = ((-qb + disc.sqrt()) / (2.0 * qa)).clamp(0.0, 1.0);
                let mut out = *a;
                for i in 0..N_DYN {
                    out.0[i] += s * (last.0[i] - a.0[i]);
                }
                return out;
            }
        }
        let mut out = *a;
        let rest = h[0] * h[0] + h[1] * h[1];
        let target = (c * c - rest).max(0.0).sqrt();
        let sign = if h[2] < 0.0 { -1.0 } else { 1.0 };
        out.0[HBM3_OFFSET_INDEX] += sign * target - h[2];
        out
    }
}
