//! Text artifacts written next to a trace: the gnuplot script and the
//! side-by-side summary for multi-run presets.

use std::fmt::Write;

use crate::metrics::Summary;
use crate::regressor::{DYN_LEN, KIN_LEN, N_DYN, N_KIN};
use crate::trace::column_index;

struct Panel {
    file: &'static str,
    title: &'static str,
    ylabel: &'static str,
    columns: Vec<String>,
}

fn panels() -> Vec<Panel> {
    let names = |prefix: &str, range: std::ops::Range<usize>| {
        range.map(|i| format!("{prefix}{i}")).collect::<Vec<_>>()
    };
    vec![
        Panel { file: "fig2_omega_b", title: "spacecraft angular velocity", ylabel: "omega_b [rad/s]", columns: vec!["omega_b".into()] },
        Panel { file: "fig3_theta_b", title: "spacecraft attitude", ylabel: "theta_b [rad]", columns: vec!["theta_b".into()] },
        Panel { file: "fig4_dx", title: "end-effector tracking error", ylabel: "dx [m]", columns: vec!["dx_1".into(), "dx_2".into()] },
        Panel { file: "fig5_a_d_hat", title: "dynamic parameter estimates", ylabel: "a_d hat", columns: names("a_d_hat_", 0..N_DYN) },
        Panel { file: "fig6_p0_hat", title: "initial angular momentum estimate", ylabel: "p0 hat [kg m^2/s]", columns: names("a_d_hat_", N_DYN..DYN_LEN) },
        Panel { file: "fig7_a_k_hat", title: "kinematic parameter estimates", ylabel: "a_k hat [m]", columns: names("a_k_hat_", 0..N_KIN) },
        Panel { file: "fig8_v0_hat", title: "CM velocity estimate", ylabel: "v0 hat [m/s]", columns: names("a_k_hat_", N_KIN..KIN_LEN) },
        Panel { file: "fig9_hb_hat", title: "estimated spacecraft inertia", ylabel: "Hb hat [kg m^2]", columns: vec!["hb_hat".into()] },
    ]
}

/// Gnuplot script drawing every panel as a PNG. `traces` pairs a legend
/// label with a CSV path relative to the script; with several traces each
/// panel overlays them.
pub fn plot_script(traces: &[(&str, &str)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot {}", env!("CARGO_PKG_NAME"));
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,560");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set xlabel 't [s]'");
    let _ = writeln!(s, "set key outside right");
    for p in panels() {
        let _ = writeln!(s, "\nset output '{}.png'", p.file);
        let _ = writeln!(s, "set title '{}'", p.title);
        let _ = writeln!(s, "set ylabel '{}'", p.ylabel);
        let mut curves = Vec::new();
        for (label, path) in traces {
            for c in &p.columns {
                let col = column_index(c).expect("panel column exists") + 1;
                let title = if traces.len() > 1 { format!("{c} ({label})") } else { c.clone() };
                curves.push(format!("'{path}' every ::1 using 1:{col} with lines title '{title}'"));
            }
        }
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    }
    s
}

/// Metrics of several runs as aligned columns, followed by the ratio of the
/// steady-state tracking errors when exactly two runs are given.
pub fn comparison(runs: &[(&str, &Summary)]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<32}", "metric");
    for (label, _) in runs {
        let _ = write!(s, " {label:>24}");
    }
    s.push('\n');
    let tables: Vec<_> = runs.iter().map(|(_, m)| m.entries()).collect();
    for (row, (key, _)) in tables[0].iter().enumerate() {
        let _ = write!(s, "{key:<32}");
        for t in &tables {
            let v: f64 = t[row].1.parse().unwrap_or(f64::NAN);
            let _ = write!(s, " {v:>24.6e}");
        }
        s.push('\n');
    }
    if let [(a, ma), (b, mb)] = runs {
        let _ = writeln!(
            s,
            "\nsteady_dx_norm ratio {b} / {a} = {:.3}",
            mb.steady_dx_norm / ma.steady_dx_norm
        );
    }
    s
}
