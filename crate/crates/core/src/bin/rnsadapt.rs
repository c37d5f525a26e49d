use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rnsadapt::export::{comparison, plot_script};
use rnsadapt::scenario::{load_scenario, Preset};
use rnsadapt::trace::write_csv;
use rnsadapt::verify::run_all;
use rnsadapt::{run, ControllerMode, Error, Scenario, Summary};

/// Adaptive zero-reaction motion control simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace.csv, summary.txt and plots.gp.
    Run(RunArgs),
    /// Run the identity and oracle suites and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML scenario file; defaults to the reference scenario.
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// reference | paper-fig2-4 | theorem1 | zero-reaction
    #[arg(long)]
    preset: Option<String>,
    /// attitude-only | full | zero-momenta | true-params
    #[arg(long)]
    mode: Option<ControllerMode>,
    /// Duration override, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Step override, s.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario whose model and initial state are checked.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::Config { .. } | Error::InvalidScenario(_) | Error::InvalidGains(_) | Error::InvalidModel(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn base_scenario(path: Option<&Path>) -> rnsadapt::Result<Scenario> {
    match path {
        Some(p) => load_scenario(p),
        None => Ok(Scenario::reference()),
    }
}

fn scenarios(a: &RunArgs) -> rnsadapt::Result<Vec<(&'static str, Scenario)>> {
    let mut list = match &a.preset {
        Some(name) => {
            let preset = Preset::from_name(name).ok_or_else(|| {
                let known: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidScenario(format!("unknown preset '{name}' (expected {})", known.join(" | ")))
            })?;
            if a.mode.is_some() && preset == Preset::Comparison {
                return Err(Error::InvalidScenario("--mode cannot be combined with preset paper-fig2-4".into()));
            }
            preset.scenarios()
        }
        None => vec![("run", base_scenario(a.scenario.as_deref())?)],
    };
    for (_, sc) in &mut list {
        if let Some(m) = a.mode {
            sc.mode = m;
        }
        if let Some(d) = a.duration {
            sc.duration = d;
        }
        if let Some(dt) = a.dt {
            sc.dt = dt;
        }
        sc.validate()?;
    }
    Ok(list)
}

fn write_run(dir: &Path, trace: &rnsadapt::SimTrace) -> rnsadapt::Result<Summary> {
    fs::create_dir_all(dir)?;
    write_csv(&trace.rows, BufWriter::new(File::create(dir.join("trace.csv"))?))?;
    let summary = Summary::from_rows(&trace.rows);
    fs::write(dir.join("summary.txt"), format!("mode = {}\n{summary}", trace.mode))?;
    Ok(summary)
}

fn cmd_run(a: &RunArgs) -> rnsadapt::Result<ExitCode> {
    let list = scenarios(a)?;
    let traces = std::thread::scope(|s| {
        let handles: Vec<_> = list.iter().map(|(_, sc)| s.spawn(move || run(sc))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<rnsadapt::Result<Vec<_>>>()
    })?;

    if let [trace] = traces.as_slice() {
        let summary = write_run(&a.out, trace)?;
        fs::write(a.out.join("plots.gp"), plot_script(&[(list[0].0, "trace.csv")]))?;
        print!("{summary}");
    } else {
        let mut summaries = Vec::new();
        for ((label, _), trace) in list.iter().zip(&traces) {
            summaries.push(write_run(&a.out.join(label), trace)?);
        }
        let rows: Vec<_> = list.iter().map(|(l, _)| *l).zip(summaries.iter()).collect();
        let table = comparison(&rows);
        fs::write(a.out.join("summary.txt"), &table)?;
        let paths: Vec<_> = list.iter().map(|(l, _)| (*l, format!("{l}/trace.csv"))).collect();
        let refs: Vec<_> = paths.iter().map(|(l, p)| (*l, p.as_str())).collect();
        fs::write(a.out.join("plots.gp"), plot_script(&refs))?;
        print!("{table}");
    }
    eprintln!("wrote {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &VerifyArgs) -> rnsadapt::Result<ExitCode> {
    let sc = base_scenario(a.scenario.as_deref())?;
    let results = run_all(&sc, a.seed, a.samples);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} passed, {failed} failed (seed {})", results.len() - failed, a.seed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
