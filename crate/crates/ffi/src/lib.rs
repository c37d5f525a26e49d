//! C interface to the closed-loop simulator.
//!
//! A simulation lives behind an opaque `RnsSimulation*` created from a preset
//! name or a TOML scenario string and released with `rns_simulation_free`.
//! Every call returns an `RnsStatus`; on failure `rns_last_error()` holds a
//! message for the calling thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rnsadapt::scenario::{parse_scenario, Preset};
use rnsadapt::{Error, Simulator, TraceRow};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RnsStatus {
    Ok = 0,
    /// The simulation has already emitted its final row.
    Finished = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    Config = 4,
    InvalidModel = 5,
    Singularity = 6,
    Divergence = 7,
    Io = 8,
    Panic = 9,
}

/// One trace row; see the CSV column list for meanings and units.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RnsRow {
    pub t: f64,
    pub theta_b: f64,
    pub attitude_error: f64,
    pub omega_b: f64,
    pub phi: [f64; 3],
    pub phi_dot_cmd: [f64; 3],
    pub x: [f64; 2],
    pub x_d: [f64; 2],
    pub dx: [f64; 2],
    pub dx_dot: [f64; 2],
    pub s_b: f64,
    pub s_x: [f64; 2],
    pub y1: f64,
    pub y2: [f64; 2],
    pub a_d_hat: [f64; 11],
    pub a_k_hat: [f64; 6],
    pub hb_hat: f64,
    pub momentum_drift: f64,
    pub linear_momentum_drift: f64,
    pub cm_drift: f64,
    pub guard_hb: u64,
    pub guard_hbm: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RnsState {
    pub theta_b: f64,
    pub base_cm_pos: [f64; 2],
    pub phi: [f64; 3],
    pub omega_b: f64,
    pub base_cm_vel: [f64; 2],
    pub phi_dot: [f64; 3],
}

/// Conserved momenta of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RnsMomenta {
    /// Angular momentum about the system CM, kg m^2/s.
    pub p0: f64,
    /// System CM velocity, m/s.
    pub v0: [f64; 2],
    /// Linear momentum, kg m/s.
    pub linear: [f64; 2],
}

/// Opaque simulation handle.
pub struct RnsSimulation {
    sim: Simulator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RnsStatus {
    match e.root() {
        Error::Config { .. } => RnsStatus::Config,
        Error::InvalidScenario(_) | Error::InvalidGains(_) => RnsStatus::InvalidArgument,
        Error::InvalidModel(_) | Error::NonpositiveBaseInertia { .. } => RnsStatus::InvalidModel,
        Error::RankDeficientCoupling { .. } | Error::DynamicSingularity { .. } => RnsStatus::Singularity,
        Error::NumericalDivergence { .. } => RnsStatus::Divergence,
        Error::Io(_) => RnsStatus::Io,
        Error::AtTime { .. } => unreachable!("root strips AtTime"),
    }
}

fn fail(e: Error) -> RnsStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn guarded<F: FnOnce() -> RnsStatus>(f: F) -> RnsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic".into());
        RnsStatus::Panic
    })
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, RnsStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(RnsStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8".into());
        RnsStatus::InvalidArgument
    })
}

fn store(sim: Simulator, out: *mut *mut RnsSimulation) -> RnsStatus {
    let handle = Box::new(RnsSimulation { sim });
    // SAFETY: caller checked `out` is non-null.
    unsafe { *out = Box::into_raw(handle) };
    RnsStatus::Ok
}

fn row_to_c(r: &TraceRow) -> RnsRow {
    let a2 = |v: &rnsadapt::nalgebra::Vector2<f64>| [v.x, v.y];
    let a3 = |v: &rnsadapt::nalgebra::Vector3<f64>| [v.x, v.y, v.z];
    RnsRow {
        t: r.t,
        theta_b: r.theta_b,
        attitude_error: r.attitude_error,
        omega_b: r.omega_b,
        phi: a3(&r.phi),
        phi_dot_cmd: a3(&r.phi_dot_cmd),
        x: a2(&r.x),
        x_d: a2(&r.x_d),
        dx: a2(&r.dx),
        dx_dot: a2(&r.dx_dot),
        s_b: r.s_b,
        s_x: a2(&r.s_x),
        y1: r.y1,
        y2: a2(&r.y2),
        a_d_hat: r.a_d_hat.into(),
        a_k_hat: r.a_k_hat.into(),
        hb_hat: r.hb_hat,
        momentum_drift: r.momentum_drift,
        linear_momentum_drift: r.linear_momentum_drift,
        cm_drift: r.cm_drift,
        guard_hb: r.guard_hb,
        guard_hbm: r.guard_hbm,
    }
}

/// Creates a simulation from a preset (`reference`, `paper-fig2-4`, `theorem1`,
/// `zero-reaction`). `run_index` picks the run for presets with several.
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_new_preset(
    name: *const c_char,
    run_index: usize,
    out: *mut *mut RnsSimulation,
) -> RnsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return RnsStatus::NullPointer;
        }
        let name = match read_str(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let Some(preset) = Preset::from_name(name) else {
            set_error(format!("unknown preset '{name}'"));
            return RnsStatus::InvalidArgument;
        };
        let Some((_, sc)) = preset.scenarios().into_iter().nth(run_index) else {
            set_error(format!("preset '{name}' has no run {run_index}"));
            return RnsStatus::InvalidArgument;
        };
        match Simulator::new(sc) {
            Ok(sim) => store(sim, out),
            Err(e) => fail(e),
        }
    })
}

/// Creates a simulation from TOML scenario text.
///
/// # Safety
/// `toml` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_new_toml(
    toml: *const c_char,
    out: *mut *mut RnsSimulation,
) -> RnsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return RnsStatus::NullPointer;
        }
        let text = match read_str(toml) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_scenario(text).and_then(Simulator::new) {
            Ok(sim) => store(sim, out),
            Err(e) => fail(e),
        }
    })
}

/// Emits the next row into `row` (may be null). Returns `RNS_STATUS_FINISHED`
/// once the final row has been emitted.
///
/// # Safety
/// `sim` must come from one of the constructors; `row` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_step(sim: *mut RnsSimulation, row: *mut RnsRow) -> RnsStatus {
    guarded(|| {
        let Some(h) = sim.as_mut() else {
            set_error("null simulation".into());
            return RnsStatus::NullPointer;
        };
        match h.sim.step() {
            Ok(Some(r)) => {
                if let Some(out) = row.as_mut() {
                    *out = row_to_c(&r);
                }
                RnsStatus::Ok
            }
            Ok(None) => RnsStatus::Finished,
            Err(e) => fail(e),
        }
    })
}

/// Steps to the end. Writes the number of rows emitted to `rows` and the last
/// row to `last`; both may be null.
///
/// # Safety
/// As for `rns_simulation_step`; `rows` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_run(
    sim: *mut RnsSimulation,
    rows: *mut u64,
    last: *mut RnsRow,
) -> RnsStatus {
    guarded(|| {
        let Some(h) = sim.as_mut() else {
            set_error("null simulation".into());
            return RnsStatus::NullPointer;
        };
        let mut n = 0u64;
        let mut final_row = None;
        loop {
            match h.sim.step() {
                Ok(Some(r)) => {
                    n += 1;
                    final_row = Some(r);
                }
                Ok(None) => break,
                Err(e) => return fail(e),
            }
        }
        if let Some(out) = rows.as_mut() {
            *out = n;
        }
        if let (Some(out), Some(r)) = (last.as_mut(), final_row) {
            *out = row_to_c(&r);
        }
        RnsStatus::Ok
    })
}

/// Current pose and velocities.
///
/// # Safety
/// `sim` must come from one of the constructors and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_state(sim: *const RnsSimulation, out: *mut RnsState) -> RnsStatus {
    guarded(|| {
        let (Some(h), Some(out)) = (sim.as_ref(), out.as_mut()) else {
            set_error("null argument".into());
            return RnsStatus::NullPointer;
        };
        let s = h.sim.state();
        *out = RnsState {
            theta_b: s.theta_b,
            base_cm_pos: [s.base_cm_pos.x, s.base_cm_pos.y],
            phi: [s.phi.x, s.phi.y, s.phi.z],
            omega_b: s.omega_b,
            base_cm_vel: [s.base_cm_vel.x, s.base_cm_vel.y],
            phi_dot: [s.phi_dot.x, s.phi_dot.y, s.phi_dot.z],
        };
        RnsStatus::Ok
    })
}

/// Time of the next row, s.
///
/// # Safety
/// `sim` must come from one of the constructors and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_time(sim: *const RnsSimulation, out: *mut f64) -> RnsStatus {
    guarded(|| {
        let (Some(h), Some(out)) = (sim.as_ref(), out.as_mut()) else {
            set_error("null argument".into());
            return RnsStatus::NullPointer;
        };
        *out = h.sim.time();
        RnsStatus::Ok
    })
}

/// Momenta fixed by the initial state.
///
/// # Safety
/// `sim` must come from one of the constructors and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_momenta(sim: *const RnsSimulation, out: *mut RnsMomenta) -> RnsStatus {
    guarded(|| {
        let (Some(h), Some(out)) = (sim.as_ref(), out.as_mut()) else {
            set_error("null argument".into());
            return RnsStatus::NullPointer;
        };
        let m = h.sim.momenta();
        let v0 = m.cm_velocity(&h.sim.scenario().model);
        *out = RnsMomenta {
            p0: m.angular_about_cm,
            v0: [v0.x, v0.y],
            linear: [m.linear.x, m.linear.y],
        };
        RnsStatus::Ok
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must be null or come from one of the constructors, and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rns_simulation_free(sim: *mut RnsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Message of the calling thread's most recent failure, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn rns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
