//! `gdm` binary: simulate point populations, solve the limit densities, or
//! run a validation study, all driven by one JSON config file.
//!
//! Exit codes: 0 success, 1 runtime failure or failed study criterion,
//! 2 invalid configuration or usage, 3 Picard non-convergence.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdm::config::{self, ConfigError, FullScheme, PdePlan};
use gdm::harness::{self, StudyError};
use gdm::io::{self, Outputs, RunManifest};
use gdm_core::domain::DomainKind;
use gdm_core::observables::{kde_intensity, GridSpec};
use gdm_core::pde::{picard_solve, reduced_step, step_viscous, NormMonitor, PdeState, ReducedState};
use gdm_core::population::{PlantPopulation, SeedPopulation};
use gdm_core::rng::RngStream;
use gdm_core::sim::{run, SimState, StopCause};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "gdm",
    version,
    about = "Grouped-dispersal population toolkit: event-driven simulation, \
             density solvers, and validation studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the event-driven population simulator
    Simulate(RunArgs),
    /// Solve the plant/seed density system
    Pde(RunArgs),
    /// Run a named validation study
    Study {
        /// One of: moments, scaling, epsilon, picard
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Master RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (one run per directory)
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (env GDM_THREADS as fallback; default all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Overwrite a completed run directory
    #[arg(long)]
    force: bool,
}

enum Failure {
    /// Exit 2: the config (or usage) is wrong.
    Config(String),
    /// Exit 1: the run itself failed.
    Runtime(String),
    /// Exit 1: the run completed but a study criterion failed.
    Criteria(String),
    /// Exit 3: the Picard iteration did not converge.
    NonConvergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) | Failure::Criteria(_) => 1,
            Failure::NonConvergence(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m)
            | Failure::Runtime(m)
            | Failure::Criteria(m)
            | Failure::NonConvergence(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn wio<T>(result: std::io::Result<T>) -> Result<T, Failure> {
    result.map_err(|e| Failure::Runtime(format!("output write failed: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("GDM_THREADS") {
            Ok(value) => Some(value.trim().parse::<usize>().map_err(|_| {
                Failure::Config(format!("GDM_THREADS must be a positive integer, got {value:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::Config("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => {
            init_threads(args.threads)?;
            cmd_simulate(&args)
        }
        Command::Pde(args) => {
            init_threads(args.threads)?;
            cmd_pde(&args)
        }
        Command::Study { name, args } => {
            init_threads(args.threads)?;
            cmd_study(&name, &args)
        }
    }
}

fn read_config(args: &RunArgs) -> Result<(Vec<u8>, config::FileConfig), Failure> {
    let bytes = fs::read(&args.config).map_err(|e| {
        Failure::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let cfg = config::parse(&bytes)?;
    Ok((bytes, cfg))
}

fn cmd_simulate(args: &RunArgs) -> Result<(), Failure> {
    let (config_bytes, cfg) = read_config(args)?;
    let plan = config::sim_plan(&cfg)?;
    let dimension = plan.config.params.domain.dimension;

    let mut outputs = Outputs::create(&args.out, args.force).map_err(Failure::Runtime)?;
    let mut manifest = RunManifest::new(&config_bytes, args.seed);

    let state = SimState::new(
        PlantPopulation::new(plan.initial_plants.clone()),
        SeedPopulation::new(),
        plan.config.k,
        RngStream::new(args.seed, 0),
    );
    let trajectory = run(&plan.config, state)
        .map_err(|e| Failure::Runtime(format!("simulation failed: {e}")))?;

    wio(outputs.write("moments.csv", io::moments_csv(&trajectory.moments).as_bytes()))?;
    wio(outputs.write("events.csv", io::events_csv(&trajectory.events, dimension).as_bytes()))?;
    wio(outputs.write(
        "snapshots.json",
        &io::to_pretty_bytes(&io::snapshots_json(&trajectory.snapshots, dimension)),
    ))?;

    let final_plants = &trajectory.final_state.plants.positions;
    if let Some(cells) = plan.kde_cells {
        let DomainKind::Box { lower, upper } = plan.config.params.domain.kind else {
            unreachable!("sim_plan validated the KDE domain");
        };
        let grid = GridSpec::new(2, lower, upper, cells);
        let kde = kde_intensity(final_plants, &grid)
            .map_err(|e| Failure::Runtime(format!("KDE grid failed: {e}")))?;
        wio(outputs.write("kde.csv", io::kde_csv(&kde).as_bytes()))?;
        wio(outputs.write(
            "kde_meta.json",
            &io::to_pretty_bytes(&io::kde_meta_json(&kde, final_plants.len())),
        ))?;
    }

    let stop = match trajectory.stop {
        StopCause::TimeMax => "time-max",
        StopCause::PlantTarget => "plant-target",
        StopCause::Absorbed => "absorbed",
    };
    let c = &trajectory.final_state.counters;
    manifest.insert("kind", json!("simulate"));
    manifest.insert("stop", json!(stop));
    manifest.insert("final_t", json!(trajectory.final_state.t));
    manifest.insert("final_plants", json!(final_plants.len()));
    manifest.insert("final_seeds", json!(trajectory.final_state.seeds.len()));
    manifest.insert("k", json!(plan.config.k));
    manifest.insert(
        "counters",
        json!({
            "releases": c.releases,
            "released_seeds": c.released_seeds,
            "maturations": c.maturations,
            "kills": c.kills,
        }),
    );
    wio(outputs.finish(manifest))?;
    println!(
        "simulate: stopped by {stop} at t = {} with {} plants, {} seeds",
        trajectory.final_state.t,
        final_plants.len(),
        trajectory.final_state.seeds.len()
    );
    Ok(())
}

/// Stepping loop shared by the direct and viscous schemes: records fields
/// and norms on the same cadence, initial state included.
fn run_full_recording(
    outputs: &mut Outputs,
    state: &mut PdeState,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<usize, Failure> {
    let (nx, ny) = (state.grid.nx, state.grid.ny);
    let mut monitor = NormMonitor::new(state);
    monitor.record(state);
    wio(outputs.write("f_000.csv", io::matrix_csv(&state.f, 1, ny).as_bytes()))?;
    wio(outputs.write("g_000.csv", io::matrix_csv(&state.g, nx, ny).as_bytes()))?;
    let mut index = 1;
    for step in 1..=n_steps {
        step_viscous(state, dt);
        if step % record_every == 0 {
            monitor.record(state);
            wio(outputs.write(
                &format!("f_{index:03}.csv"),
                io::matrix_csv(&state.f, 1, ny).as_bytes(),
            ))?;
            wio(outputs.write(
                &format!("g_{index:03}.csv"),
                io::matrix_csv(&state.g, nx, ny).as_bytes(),
            ))?;
            index += 1;
        }
    }
    wio(outputs.write("norms.csv", io::norms_csv(&monitor.entries).as_bytes()))?;
    Ok(index)
}

fn run_reduced_recording(
    outputs: &mut Outputs,
    state: &mut ReducedState,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<usize, Failure> {
    let (rows, cols) = if state.dim == 2 { (state.n, state.n) } else { (1, state.n) };
    let mut masses = String::from("t,mass_f,mass_g\n");
    let record = |outputs: &mut Outputs,
                      state: &ReducedState,
                      masses: &mut String,
                      index: usize|
     -> Result<(), Failure> {
        masses.push_str(&format!("{},{},{}\n", state.t, state.mass_f(), state.mass_g()));
        wio(outputs.write(
            &format!("f_{index:03}.csv"),
            io::matrix_csv(&state.f, rows, cols).as_bytes(),
        ))?;
        wio(outputs.write(
            &format!("g_{index:03}.csv"),
            io::matrix_csv(&state.g, rows, cols).as_bytes(),
        ))
    };
    record(outputs, state, &mut masses, 0)?;
    let mut index = 1;
    for step in 1..=n_steps {
        reduced_step(state, dt);
        if step % record_every == 0 {
            record(outputs, state, &mut masses, index)?;
            index += 1;
        }
    }
    wio(outputs.write("masses.csv", masses.as_bytes()))?;
    Ok(index)
}

fn cmd_pde(args: &RunArgs) -> Result<(), Failure> {
    let (config_bytes, cfg) = read_config(args)?;
    let plan = config::pde_plan(&cfg)?;

    let mut outputs = Outputs::create(&args.out, args.force).map_err(Failure::Runtime)?;
    let mut manifest = RunManifest::new(&config_bytes, args.seed);
    manifest.insert("kind", json!("pde"));

    match plan {
        PdePlan::Full { mut state, scheme, dt, n_steps, record_every } => {
            manifest.insert("grid", json!([state.grid.nx, state.grid.ny]));
            manifest.insert("dt", json!(dt));
            manifest.insert("steps", json!(n_steps));
            match scheme {
                FullScheme::Direct | FullScheme::Viscous => {
                    manifest.insert(
                        "scheme",
                        json!(if matches!(scheme, FullScheme::Direct) { "direct" } else { "viscous" }),
                    );
                    manifest.insert("epsilon", json!(state.epsilon));
                    let records =
                        run_full_recording(&mut outputs, &mut state, dt, n_steps, record_every)?;
                    manifest.insert("records", json!(records));
                    println!("pde: advanced to t = {} with {records} recorded snapshots", state.t);
                }
                FullScheme::Picard { n_max, tol } => {
                    manifest.insert("scheme", json!("picard"));
                    let outcome = picard_solve(&state, dt, n_steps, n_max, tol)
                        .map_err(|e| Failure::NonConvergence(e.to_string()))?;
                    let ny = state.grid.ny;
                    wio(outputs.write(
                        "f_final.csv",
                        io::matrix_csv(&outcome.f, 1, ny).as_bytes(),
                    ))?;
                    wio(outputs.write(
                        "g_final.csv",
                        io::matrix_csv(&outcome.g, state.grid.nx, ny).as_bytes(),
                    ))?;
                    wio(outputs.write(
                        "picard.json",
                        &io::to_pretty_bytes(&json!({
                            "iterations": outcome.iterations,
                            "sup_distances": outcome.diffs,
                            "min_increments": outcome.min_increments,
                        })),
                    ))?;
                    manifest.insert("iterations", json!(outcome.iterations));
                    println!("pde: picard converged in {} iterations", outcome.iterations);
                }
            }
        }
        PdePlan::Reduced { mut state, dt, n_steps, record_every } => {
            manifest.insert("scheme", json!("reduced"));
            manifest.insert("grid", json!([state.n, state.n]));
            manifest.insert("dimension", json!(state.dim));
            manifest.insert("dt", json!(dt));
            manifest.insert("steps", json!(n_steps));
            let records =
                run_reduced_recording(&mut outputs, &mut state, dt, n_steps, record_every)?;
            manifest.insert("records", json!(records));
            println!(
                "pde: reduced system advanced to t = {} with {records} recorded snapshots",
                state.t
            );
        }
    }
    wio(outputs.finish(manifest))?;
    Ok(())
}

fn cmd_study(name: &str, args: &RunArgs) -> Result<(), Failure> {
    if !harness::KNOWN_STUDIES.contains(&name) {
        return Err(Failure::Config(format!(
            "unknown study \"{name}\" (expected moments, scaling, epsilon, or picard)"
        )));
    }
    let (config_bytes, cfg) = read_config(args)?;
    let mut outputs = Outputs::create(&args.out, args.force).map_err(Failure::Runtime)?;
    let mut manifest = RunManifest::new(&config_bytes, args.seed);

    let report = harness::run_study(name, &cfg, args.seed).map_err(|e| match e {
        StudyError::Config(c) => Failure::Config(c.to_string()),
        StudyError::Picard(p) => Failure::NonConvergence(p.to_string()),
    })?;

    let mut report_bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
    report_bytes.push(b'\n');
    wio(outputs.write("study_report.json", &report_bytes))?;
    let summary = report.text_summary();
    wio(outputs.write("study_report.txt", summary.as_bytes()))?;
    manifest.insert("kind", json!("study"));
    manifest.insert("study", json!(name));
    manifest.insert("passed", json!(report.passed));
    wio(outputs.finish(manifest))?;

    print!("{summary}");
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Criteria(format!("study {name}: one or more criteria failed")))
    }
}
