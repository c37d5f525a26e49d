//! Per-tick simulation record and its CSV form.
//!
//! Column order is fixed (see [`columns`]); the header row is always written.
//! Floats use `{:.16e}` (17 significant digits), so a trace read back from
//! disk reproduces the in-memory values exactly.

use std::io::{Read, Write};

use nalgebra::{SVector, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::model::MomentumPair;
use crate::regressor::{DYN_LEN, KIN_LEN};
use crate::sim::ControllerMode;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub theta_b: f64,
    /// `theta_b - theta_bd`, wrapped to (-pi, pi].
    pub attitude_error: f64,
    pub omega_b: f64,
    pub phi: Vector3<f64>,
    pub phi_dot_cmd: Vector3<f64>,
    /// End-effector position.
    pub x: Vector2<f64>,
    pub x_d: Vector2<f64>,
    pub dx: Vector2<f64>,
    pub dx_dot: Vector2<f64>,
    pub s_b: f64,
    pub s_x: Vector2<f64>,
    pub y1: f64,
    pub y2: Vector2<f64>,
    /// Estimates used for this tick's command.
    pub a_d_hat: SVector<f64, DYN_LEN>,
    pub a_k_hat: SVector<f64, KIN_LEN>,
    pub hb_hat: f64,
    /// Relative angular momentum deviation from the conserved value.
    pub momentum_drift: f64,
    pub linear_momentum_drift: f64,
    /// Distance between the system CM and its ballistic prediction, m.
    pub cm_drift: f64,
    pub guard_hb: u64,
    pub guard_hbm: u64,
}

pub fn columns() -> Vec<String> {
    let mut c: Vec<String> = ["t", "theta_b", "attitude_error", "omega_b"].map(String::from).to_vec();
    c.extend((1..=3).map(|i| format!("phi_{i}")));
    c.extend((1..=3).map(|i| format!("phi_dot_cmd_{i}")));
    for name in ["x", "x_d", "dx", "dx_dot"] {
        c.push(format!("{name}_1"));
        c.push(format!("{name}_2"));
    }
    c.extend(["s_b", "s_x_1", "s_x_2", "y1", "y2_1", "y2_2"].map(String::from));
    c.extend((0..DYN_LEN).map(|i| format!("a_d_hat_{i}")));
    c.extend((0..KIN_LEN).map(|i| format!("a_k_hat_{i}")));
    c.extend(
        ["hb_hat", "momentum_drift", "linear_momentum_drift", "cm_drift", "guard_hb", "guard_hbm"]
            .map(String::from),
    );
    c
}

pub fn column_index(name: &str) -> Option<usize> {
    columns().iter().position(|c| c == name)
}

impl TraceRow {
    pub fn to_values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.theta_b, self.attitude_error, self.omega_b];
        v.extend(self.phi.iter());
        v.extend(self.phi_dot_cmd.iter());
        for p in [&self.x, &self.x_d, &self.dx, &self.dx_dot] {
            v.extend(p.iter());
        }
        v.push(self.s_b);
        v.extend(self.s_x.iter());
        v.push(self.y1);
        v.extend(self.y2.iter());
        v.extend(self.a_d_hat.iter());
        v.extend(self.a_k_hat.iter());
        v.extend([
            self.hb_hat,
            self.momentum_drift,
            self.linear_momentum_drift,
            self.cm_drift,
            self.guard_hb as f64,
            self.guard_hbm as f64,
        ]);
        v
    }

    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.len() != columns().len() {
            return None;
        }
        let mut it = v.iter().copied();
        let mut next = || it.next().expect("length checked");
        let t = next();
        let theta_b = next();
        let attitude_error = next();
        let omega_b = next();
        let mut v3 = || Vector3::new(next(), next(), next());
        let phi = v3();
        let phi_dot_cmd = v3();
        let mut v2 = || Vector2::new(next(), next());
        let x = v2();
        let x_d = v2();
        let dx = v2();
        let dx_dot = v2();
        let s_b = next();
        let s_x = Vector2::new(next(), next());
        let y1 = next();
        let y2 = Vector2::new(next(), next());
        let a_d_hat = SVector::from_fn(|_, _| next());
        let a_k_hat = SVector::from_fn(|_, _| next());
        Some(Self {
            t,
            theta_b,
            attitude_error,
            omega_b,
            phi,
            phi_dot_cmd,
            x,
            x_d,
            dx,
            dx_dot,
            s_b,
            s_x,
            y1,
            y2,
            a_d_hat,
            a_k_hat,
            hb_hat: next(),
            momentum_drift: next(),
            linear_momentum_drift: next(),
            cm_drift: next(),
            guard_hb: next() as u64,
            guard_hbm: next() as u64,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub mode: ControllerMode,
    pub dt: f64,
    pub theta_bd: f64,
    pub momenta: MomentumPair,
    pub rows: Vec<TraceRow>,
}

impl SimTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("a trace always holds the initial row")
    }
}

pub fn write_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns()).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.to_values().iter().map(|v| format!("{v:.16e}")))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != columns() {
        return Err(Error::InvalidScenario("trace CSV header does not match the expected columns".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let values = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidScenario(format!("bad number in trace CSV: {e}")))?;
        rows.push(
            TraceRow::from_values(&values)
                .ok_or_else(|| Error::InvalidScenario("trace CSV row has the wrong width".into()))?,
        );
    }
    Ok(rows)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidScenario(format!("trace CSV: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_names_are_unique() {
        let cols = columns();
        let mut sorted = cols.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), cols.len());
        assert_eq!(cols[0], "t");
        assert_eq!(column_index("y1"), Some(21));
    }

    #[test]
    fn rejects_foreign_header() {
        let data = "a,b\n1,2\n";
        assert!(read_csv(data.as_bytes()).is_err());
    }
}
