//! Independent reference for the multibody quantities: the chain is walked in
//! complex arithmetic, one body at a time, and nothing from the library's
//! model module is reused.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Complex, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnsadapt::model::{ModelParams, SystemState};

pub struct Oracle {
    pub angular: f64,
    pub linear: Vector2<f64>,
    pub cm: Vector2<f64>,
    pub ee: Vector2<f64>,
    pub ee_vel: Vector2<f64>,
}

fn c(v: &Vector2<f64>) -> Complex<f64> {
    Complex::new(v.x, v.y)
}

fn v(z: Complex<f64>) -> Vector2<f64> {
    Vector2::new(z.re, z.im)
}

pub fn oracle(model: &ModelParams, s: &SystemState) -> Oracle {
    let b = model.bodies();
    let i = Complex::i();
    let e = |a: f64| Complex::from_polar(1.0, a);

    let (mut th, mut w) = (s.theta_b, s.omega_b);
    let mut pos = vec![c(&s.base_cm_pos)];
    let mut vel = vec![c(&s.base_cm_vel)];
    let mut rates = vec![w];
    let mut jz = pos[0] + b[0].r * e(th);
    let mut jv = vel[0] + i * w * b[0].r * e(th);
    for k in 1..4 {
        th += s.phi[k - 1];
        w += s.phi_dot[k - 1];
        let cz = jz + b[k].l * e(th);
        let cv = jv + i * w * b[k].l * e(th);
        pos.push(cz);
        vel.push(cv);
        rates.push(w);
        jz = cz + b[k].r * e(th);
        jv = cv + i * w * b[k].r * e(th);
    }
    let m_tot: f64 = b.iter().map(|x| x.mass).sum();
    let zg = (0..4).map(|k| pos[k] * b[k].mass).sum::<Complex<f64>>() / m_tot;
    let p = (0..4).map(|k| vel[k] * b[k].mass).sum::<Complex<f64>>();
    let angular = (0..4)
        .map(|k| b[k].inertia_cm * rates[k] + b[k].mass * ((pos[k] - zg).conj() * vel[k]).im)
        .sum();
    Oracle { angular, linear: v(p), cm: v(zg), ee: v(jz), ee_vel: v(jv) }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(r: &mut ChaCha8Rng) -> SystemState {
    let mut u = |a: f64| r.gen_range(-a..=a);
    SystemState {
        theta_b: u(PI),
        base_cm_pos: Vector2::new(u(3.0), u(3.0)),
        phi: Vector3::new(u(PI), u(PI), u(PI)),
        omega_b: u(2.0),
        base_cm_vel: Vector2::new(u(2.0), u(2.0)),
        phi_dot: Vector3::new(u(2.0), u(2.0), u(2.0)),
    }
}

/// Relative error with the natural magnitude of the compared terms as scale.
pub fn rel(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1e-300)
}
