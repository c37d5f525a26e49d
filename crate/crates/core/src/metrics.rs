//! Summary metrics derived from trace rows only, so they can be recomputed
//! from a CSV on disk.

use std::fmt;

use crate::trace::TraceRow;

/// Window used for the signal-energy comparison, s.
pub const SIGNAL_WINDOW: f64 = 2.0;
/// Window used for the steady-state tracking error, s.
pub const STEADY_STATE_WINDOW: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub duration: f64,
    pub final_abs_omega_b: f64,
    pub final_abs_attitude_error: f64,
    pub max_dx_norm: f64,
    pub final_dx_norm: f64,
    pub final_dx_dot_norm: f64,
    /// Mean of `|dx|` over the last [`STEADY_STATE_WINDOW`] seconds.
    pub steady_dx_norm: f64,
    /// Mean of `y1^2` over the first and last [`SIGNAL_WINDOW`] seconds.
    pub y1_energy_first: f64,
    pub y1_energy_last: f64,
    pub y2_energy_first: f64,
    pub y2_energy_last: f64,
    pub min_hb_hat: f64,
    pub guard_triggers: u64,
    pub max_momentum_drift: f64,
    pub max_cm_drift: f64,
}

fn mean<I: Iterator<Item = f64>>(it: I) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Half-open window `[start, end)` by time, with the final row included when
/// the window reaches the end of the trace.
fn window(rows: &[TraceRow], start: f64, end: f64) -> impl Iterator<Item = &TraceRow> {
    let t_end = rows.last().map_or(0.0, |r| r.t);
    let eps = 1e-9;
    rows.iter().filter(move |r| {
        r.t >= start - eps && (r.t < end - eps || (end >= t_end - eps && r.t <= t_end + eps))
    })
}

impl Summary {
    pub fn from_rows(rows: &[TraceRow]) -> Self {
        let last = rows.last().expect("non-empty trace");
        let t_end = last.t;
        let first_w = window(rows, 0.0, SIGNAL_WINDOW);
        let y1_first = mean(first_w.map(|r| r.y1 * r.y1));
        let y2_first = mean(window(rows, 0.0, SIGNAL_WINDOW).map(|r| r.y2.norm_squared()));
        let tail = (t_end - SIGNAL_WINDOW).max(0.0);
        let y1_last = mean(window(rows, tail, t_end).map(|r| r.y1 * r.y1));
        let y2_last = mean(window(rows, tail, t_end).map(|r| r.y2.norm_squared()));
        let steady = mean(
            window(rows, (t_end - STEADY_STATE_WINDOW).max(0.0), t_end).map(|r| r.dx.norm()),
        );
        Self {
            duration: t_end,
            final_abs_omega_b: last.omega_b.abs(),
            final_abs_attitude_error: last.attitude_error.abs(),
            max_dx_norm: rows.iter().map(|r| r.dx.norm()).fold(0.0, f64::max),
            final_dx_norm: last.dx.norm(),
            final_dx_dot_norm: last.dx_dot.norm(),
            steady_dx_norm: steady,
            y1_energy_first: y1_first,
            y1_energy_last: y1_last,
            y2_energy_first: y2_first,
            y2_energy_last: y2_last,
            min_hb_hat: rows.iter().map(|r| r.hb_hat).fold(f64::INFINITY, f64::min),
            guard_triggers: last.guard_hb + last.guard_hbm,
            max_momentum_drift: rows.iter().map(|r| r.momentum_drift).fold(0.0, f64::max),
            max_cm_drift: rows.iter().map(|r| r.cm_drift).fold(0.0, f64::max),
        }
    }

    pub fn y1_energy_ratio(&self) -> f64 {
        self.y1_energy_last / self.y1_energy_first
    }

    pub fn y2_energy_ratio(&self) -> f64 {
        self.y2_energy_last / self.y2_energy_first
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("duration_s", fmt_f(self.duration)),
            ("final_abs_omega_b_rad_per_s", fmt_f(self.final_abs_omega_b)),
            ("final_abs_attitude_error_rad", fmt_f(self.final_abs_attitude_error)),
            ("max_dx_norm_m", fmt_f(self.max_dx_norm)),
            ("final_dx_norm_m", fmt_f(self.final_dx_norm)),
            ("final_dx_dot_norm_m_per_s", fmt_f(self.final_dx_dot_norm)),
            ("steady_dx_norm_m", fmt_f(self.steady_dx_norm)),
            ("y1_energy_first", fmt_f(self.y1_energy_first)),
            ("y1_energy_last", fmt_f(self.y1_energy_last)),
            ("y1_energy_ratio", fmt_f(self.y1_energy_ratio())),
            ("y2_energy_first", fmt_f(self.y2_energy_first)),
            ("y2_energy_last", fmt_f(self.y2_energy_last)),
            ("y2_energy_ratio", fmt_f(self.y2_energy_ratio())),
            ("min_hb_hat_kg_m2", fmt_f(self.min_hb_hat)),
            ("guard_triggers", self.guard_triggers.to_string()),
            ("max_momentum_drift", fmt_f(self.max_momentum_drift)),
            ("max_cm_drift_m", fmt_f(self.max_cm_drift)),
        ]
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
