//! Linear parametrizations of the angular momentum and of the end-effector
//! velocity.
//!
//! Dynamic parameters (10 entries, then `p0`):
//!
//! | idx | parameter |
//! |-----|-----------|
//! | 0..=5 | `W_01, W_12, W_13, W_23, W_02, W_03` (mass couplings between body pairs) |
//! | 6..=9 | `S_0, S_1, S_2, S_3` with `S_k = sum_{i>=k} (I_i + W_ii)` |
//! | 10 | `p0` |
//!
//! Kinematic parameters (4 entries, then `v0`): the virtual-link lengths
//! `K_0..K_3` such that the end-effector sits at `r_G + sum_i K_i u(theta_i)`,
//! followed by the two components of the system CM velocity.
//!
//! Both regressors are linear in the velocities, so each is stored as a
//! per-velocity basis (one row/block per `omega_b, phi_dot_1..3`). Evaluating
//! the basis against a parameter vector gives the coupling matrices built from
//! that vector, which is how the controller forms its estimated `Hb`, `Hbm`,
//! `Jb` and `Jm`.

use nalgebra::{Matrix2x3, Matrix2x4, RowSVector, RowVector3, SMatrix, SVector, Vector2, Vector3};

use crate::linalg::unit_perp;
use crate::model::{
    body_angles, mass_geometry, ModelParams, MomentumPair, SystemState, NUM_BODIES, NUM_JOINTS,
};

/// Number of dynamic parameters before `p0` is appended.
pub const N_DYN: usize = 10;
/// Number of kinematic parameters before `v0` is appended.
pub const N_KIN: usize = 4;
pub const DYN_LEN: usize = N_DYN + 1;
pub const KIN_LEN: usize = N_KIN + 2;

/// Body pairs whose coupling `W_ij` occupies entries 0..=5.
pub const DYN_PAIRS: [(usize, usize); 6] = [(0, 1), (1, 2), (1, 3), (2, 3), (0, 2), (0, 3)];

pub type DynRegressor = RowSVector<f64, DYN_LEN>;
pub type KinRegressor = SMatrix<f64, 2, KIN_LEN>;

/// Generalized dynamic parameters `[a_d; p0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynParams(pub SVector<f64, DYN_LEN>);

impl DynParams {
    pub fn from_slice(v: &[f64]) -> Option<Self> {
        (v.len() == DYN_LEN).then(|| Self(SVector::from_column_slice(v)))
    }

    pub fn p0(&self) -> f64 {
        self.0[N_DYN]
    }

    pub fn set_p0(&mut self, p0: f64) {
        self.0[N_DYN] = p0;
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Generalized kinematic parameters `[a_k; v0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinParams(pub SVector<f64, KIN_LEN>);

impl KinParams {
    pub fn from_slice(v: &[f64]) -> Option<Self> {
        (v.len() == KIN_LEN).then(|| Self(SVector::from_column_slice(v)))
    }

    pub fn v0(&self) -> Vector2<f64> {
        Vector2::new(self.0[N_KIN], self.0[N_KIN + 1])
    }

    pub fn set_v0(&mut self, v0: Vector2<f64>) {
        self.0[N_KIN] = v0.x;
        self.0[N_KIN + 1] = v0.y;
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// Row `0` multiplies `omega_b`, row `k` multiplies `phi_dot_k`.
pub type DynBasis = SMatrix<f64, 4, N_DYN>;

pub fn dyn_basis(theta_b: f64, phi: &Vector3<f64>) -> DynBasis {
    let angles = body_angles(theta_b, phi);
    let mut basis = DynBasis::zeros();
    for (col, &(i, j)) in DYN_PAIRS.iter().enumerate() {
        let c = (angles[i] - angles[j]).cos();
        basis[(0, col)] = 2.0 * c;
        for k in 1..=NUM_JOINTS {
            let hits = (i >= k) as u8 + (j >= k) as u8;
            basis[(k, col)] = c * f64::from(hits);
        }
    }
    // S_k multiplies the k-th velocity only
    for k in 0..NUM_BODIES {
        basis[(k, 6 + k)] = 1.0;
    }
    basis
}

fn velocity_row(omega_b: f64, phi_dot: &Vector3<f64>) -> SMatrix<f64, 1, 4> {
    SMatrix::<f64, 1, 4>::new(omega_b, phi_dot[0], phi_dot[1], phi_dot[2])
}

/// `Ybar_d = [Y_d | -1]` with `Y_d a_d = Hb*omega_b + Hbm*phi_dot`.
pub fn dyn_regressor(state: &SystemState) -> DynRegressor {
    let y = velocity_row(state.omega_b, &state.phi_dot) * dyn_basis(state.theta_b, &state.phi);
    let mut out = DynRegressor::zeros();
    out.fixed_columns_mut::<N_DYN>(0).copy_from(&y);
    out[N_DYN] = -1.0;
    out
}

/// `(Hb, Hbm)` built from an arbitrary dynamic parameter vector.
pub fn inertia_from_params(a: &DynParams, theta_b: f64, phi: &Vector3<f64>) -> (f64, RowVector3<f64>) {
    let basis = dyn_basis(theta_b, phi);
    let a_d = a.0.fixed_rows::<N_DYN>(0);
    let per_velocity = basis * a_d;
    (
        per_velocity[0],
        RowVector3::new(per_velocity[1], per_velocity[2], per_velocity[3]),
    )
}

/// Block `0` multiplies `omega_b`, block `k` multiplies `phi_dot_k`.
pub type KinBasis = [Matrix2x4<f64>; 4];

pub fn kin_basis(theta_b: f64, phi: &Vector3<f64>) -> KinBasis {
    let angles = body_angles(theta_b, phi);
    std::array::from_fn(|k| {
        let mut m = Matrix2x4::zeros();
        for i in k..NUM_BODIES {
            m.set_column(i, &unit_perp(angles[i]));
        }
        m
    })
}

/// `Ybar_k = [Y_k | I_2]` with `Y_k a_k = Jb*omega_b + Jm*phi_dot`.
pub fn kin_regressor(state: &SystemState) -> KinRegressor {
    let basis = kin_basis(state.theta_b, &state.phi);
    let v = [state.omega_b, state.phi_dot[0], state.phi_dot[1], state.phi_dot[2]];
    let y: Matrix2x4<f64> = basis.iter().zip(v).map(|(b, s)| b * s).sum();
    let mut out = KinRegressor::zeros();
    out.fixed_columns_mut::<N_KIN>(0).copy_from(&y);
    out[(0, N_KIN)] = 1.0;
    out[(1, N_KIN + 1)] = 1.0;
    out
}

/// `(Jb, Jm)` built from an arbitrary kinematic parameter vector.
pub fn jacobians_from_params(a: &KinParams, theta_b: f64, phi: &Vector3<f64>) -> (Vector2<f64>, Matrix2x3<f64>) {
    let basis = kin_basis(theta_b, phi);
    let a_k = a.0.fixed_rows::<N_KIN>(0);
    let jb = basis[0] * a_k;
    let mut jm = Matrix2x3::zeros();
    for k in 0..NUM_JOINTS {
        jm.set_column(k, &(basis[k + 1] * a_k));
    }
    (jb, jm)
}

/// Ground-truth parameter vectors for `params` with the run's conserved
/// `momenta`. Only used for validation and the true-parameter baseline.
pub fn true_params(params: &ModelParams, momenta: &MomentumPair) -> (DynParams, KinParams) {
    let geo = mass_geometry(params);
    let b = params.bodies();
    let mut d = SVector::<f64, DYN_LEN>::zeros();
    for (col, &(i, j)) in DYN_PAIRS.iter().enumerate() {
        d[col] = geo.coupling[(i, j)];
    }
    let diag: [f64; NUM_BODIES] = std::array::from_fn(|i| b[i].inertia_cm + geo.coupling[(i, i)]);
    for k in 0..NUM_BODIES {
        d[6 + k] = diag[k..].iter().sum();
    }
    d[N_DYN] = momenta.angular_about_cm;

    let v0 = momenta.cm_velocity(params);
    let mut k = SVector::<f64, KIN_LEN>::zeros();
    for i in 0..NUM_BODIES {
        k[i] = geo.ee_coeff[i];
    }
    k[N_KIN] = v0.x;
    k[N_KIN + 1] = v0.y;
    (DynParams(d), KinParams(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{brute_force_momentum, coupling_matrices};
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
    fn reference_parameter_values() {
        let p = ModelParams::reference();
        let m = brute_force_momentum(&p, &reference_initial());
        let (d, k) = true_params(&p, &m);
        let printed_d = [
            11.9952, 12.6126, 4.1234, 4.4982, 6.8544, 2.2409, 69.7260, 35.1779, 15.1638, 3.1686,
        ];
        for (i, want) in printed_d.iter().enumerate() {
            assert!((d.0[i] - want).abs() < 1e-4, "a_d[{i}] = {} vs {want}", d.0[i]);
        }
        let printed_k = [0.6277, 1.1550, 1.2600, 1.3542];
        for (i, want) in printed_k.iter().enumerate() {
            assert!((k.0[i] - want).abs() < 1e-4, "a_k[{i}] = {} vs {want}", k.0[i]);
        }
        assert!((d.p0() - -1.6467).abs() < 1e-3);
        assert!((k.v0() - Vector2::new(0.0988, 0.0943)).amax() < 1e-3);
    }

    #[test]
    fn zero_velocity_regressors() {
        let s = SystemState::at_rest(0.4, Vector2::zeros(), Vector3::new(0.3, -0.2, 1.0));
        let yd = dyn_regressor(&s);
        assert!(yd.fixed_columns::<N_DYN>(0).iter().all(|&v| v == 0.0));
        assert_eq!(yd[N_DYN], -1.0);
        let yk = kin_regressor(&s);
        assert!(yk.fixed_columns::<N_KIN>(0).iter().all(|&v| v == 0.0));
        assert_eq!(yk.fixed_columns::<2>(N_KIN).into_owned(), nalgebra::Matrix2::identity());
    }

    #[test]
    fn estimated_matrices_from_truth_match_model() {
        let p = ModelParams::reference();
        let s = reference_initial();
        let (d, k) = true_params(&p, &brute_force_momentum(&p, &s));
        let cm = coupling_matrices(&p, &s);
        let (hb, hbm) = inertia_from_params(&d, s.theta_b, &s.phi);
        let (jb, jm) = jacobians_from_params(&k, s.theta_b, &s.phi);
        assert!((hb - cm.hb_bar).abs() < 1e-12 * cm.hb_bar);
        assert!((hbm - cm.hbm_bar).amax() < 1e-12 * cm.hb_bar);
        assert!((jb - cm.jb).amax() < 1e-12);
        assert!((jm - cm.jm).amax() < 1e-12);
    }

    #[test]
    fn slice_constructors_check_length() {
        assert!(DynParams::from_slice(&[0.0; 10]).is_none());
        assert!(DynParams::from_slice(&[0.0; 11]).is_some());
        assert!(KinParams::from_slice(&[0.0; 5]).is_none());
        assert!(KinParams::from_slice(&[0.0; 6]).is_some());
    }
}
