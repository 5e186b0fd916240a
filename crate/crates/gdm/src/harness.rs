//! Validation studies: pre-registered experiments that tie the simulator,
//! the observables, and the solvers together. Each study produces a
//! [`StudyReport`] whose checks cite the named thresholds in [`crate::defaults`].
//!
//! Reproducibility contract: a report is a deterministic function of the
//! study settings and the master seed, whatever the worker count. Replicas
//! own disjoint RNG streams (stream index = flat case index) and results
//! are reassembled in case order. The only nondeterministic values in a
//! report are the `runtime_seconds` metrics.

use std::time::Instant;

use gdm_core::domain::{Domain, Point};
use gdm_core::observables::{closed_form_moments, histogram_measure, l1_distance, GridSpec, Histogram};
use gdm_core::params::{
    CountingDistribution, DiffusionSpec, MaturationRate, ModelParams, Normalization,
};
use gdm_core::pde::{
    picard_solve, run_direct, step_viscous, BoundaryCondition, Grid, PdeState, PicardError,
};
use gdm_core::population::{PlantPopulation, SeedPopulation};
use gdm_core::rng::RngStream;
use gdm_core::sim::{run, EventScheme, SimConfig, SimState, StopRule};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::defaults;

pub const KNOWN_STUDIES: [&str; 4] = ["moments", "scaling", "epsilon", "picard"];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    /// Name of the defaults constant (and acceptance criterion) this check
    /// instantiates.
    pub criterion: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(criterion: &str, passed: bool, detail: String) -> Self {
        Check { criterion: criterion.to_string(), passed, detail }
    }
}

#[derive(Debug, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub master_seed: u64,
    pub parameters: Value,
    pub cases: Vec<Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl StudyReport {
    fn assemble(
        study: &str,
        master_seed: u64,
        parameters: Value,
        cases: Vec<Value>,
        checks: Vec<Check>,
    ) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        StudyReport {
            study: study.to_string(),
            master_seed,
            parameters,
            cases,
            checks,
            passed,
        }
    }

    pub fn text_summary(&self) -> String {
        let mut out = format!("study {} (seed {})\n", self.study, self.master_seed);
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.criterion,
                c.detail
            ));
        }
        out.push_str(&format!("result: {}\n", if self.passed { "pass" } else { "fail" }));
        out
    }
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo check of the branching-moment ODE: constant unit rates, one
/// founding plant, free space. Both population means must sit within
/// `MOMENT_SE_FACTOR` standard errors of the oracle at every checkpoint.
pub fn moment_validation(
    counting: CountingDistribution,
    t_checks: &[f64],
    replicas: usize,
    seed: u64,
) -> StudyReport {
    assert!(!t_checks.is_empty() && replicas >= 2);
    let t_max = t_checks.iter().cloned().fold(0.0, f64::max);
    let config = SimConfig {
        params: ModelParams {
            domain: Domain::all_space(2),
            counting,
            kernel: gdm_core::kernels::DispersalKernel::exponential(1.0, 2),
            rate: MaturationRate::Constant { value: 1.0 },
            diffusion: DiffusionSpec::Constant { sigma2: 1.0 },
            release_rate: 1.0,
            kernel_normalization: Normalization::Raw,
        },
        k: 1,
        stop: StopRule::at_time(t_max),
        dt_max: 0.25,
        scheme: EventScheme::Thinning,
        snapshot_every: None,
    };

    let start = Instant::now();
    let samples: Vec<Vec<(u64, u64)>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let state = SimState::singleton_at_origin(1, RngStream::new(seed, r as u64));
            let traj = run(&config, state).expect("free-space run");
            t_checks.iter().map(|&t| traj.moments.counts_at(t)).collect()
        })
        .collect();
    let runtime = start.elapsed().as_secs_f64();

    let mu1 = counting.mean();
    let mut cases = Vec::new();
    let mut checks = Vec::new();
    for (ti, &t) in t_checks.iter().enumerate() {
        let plants: Vec<f64> = samples.iter().map(|s| s[ti].0 as f64).collect();
        let seeds: Vec<f64> = samples.iter().map(|s| s[ti].1 as f64).collect();
        let (oracle_p, oracle_s) = closed_form_moments(mu1, t);
        for (name, values, oracle) in
            [("N_p", &plants, oracle_p), ("N_s", &seeds, oracle_s)]
        {
            let (mean, se) = mean_and_se(values);
            let gate = defaults::MOMENT_SE_FACTOR * se;
            checks.push(Check::new(
                "moment-mc-4se",
                (mean - oracle).abs() <= gate,
                format!(
                    "{name} at t={t}: mc {mean:.5}, oracle {oracle:.5}, |diff| {:.2e}, gate {gate:.2e}",
                    (mean - oracle).abs()
                ),
            ));
        }
        let (mean_p, se_p) = mean_and_se(&plants);
        let (mean_s, se_s) = mean_and_se(&seeds);
        cases.push(json!({
            "t": t,
            "mean_plants": mean_p,
            "se_plants": se_p,
            "oracle_plants": oracle_p,
            "mean_seeds": mean_s,
            "se_seeds": se_s,
            "oracle_seeds": oracle_s,
        }));
    }
    StudyReport::assemble(
        "moments",
        seed,
        json!({
            "replicas": replicas,
            "mu1": mu1,
            "t_checks": t_checks,
            "se_factor": defaults::MOMENT_SE_FACTOR,
            "runtime_seconds": runtime,
        }),
        cases,
        checks,
    )
}

#[derive(Debug, Clone)]
pub struct ScalingSettings {
    pub k_list: Vec<u64>,
    pub replicas: usize,
    pub cells: usize,
    pub l1_max: f64,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        ScalingSettings {
            k_list: defaults::SCALING_K_LIST.to_vec(),
            replicas: defaults::SCALING_REPLICAS,
            cells: defaults::SCALING_CELLS,
            l1_max: defaults::SCALING_L1_MAX,
        }
    }
}

/// Reference scenario for the population-scaling study, one-dimensional so
/// the limit density comes from the full origin/position system.
///
/// Plants start as K i.i.d. uniform draws on [-5, 5] inside the reflecting
/// box [-10, 10]; unit constant rates, sigma^2 = 1, exponential kernel with
/// scale 2, renormalized on the box; horizon T = 1.
mod scaling_reference {
    pub const LO: f64 = -10.0;
    pub const HI: f64 = 10.0;
    pub const F0_HALF_WIDTH: f64 = 5.0;
    pub const F0_DENSITY: f64 = 0.1;
    pub const SIGMA2: f64 = 1.0;
    pub const KERNEL_BETA: f64 = 2.0;
    /// Solver resolution for the limit density (cell edges must align:
    /// `PDE_NODES - 1` a multiple of the histogram cell count).
    pub const PDE_NODES: usize = 257;
    pub const PDE_DT: f64 = 1e-3;
}

fn scaling_sim_config(k: u64) -> SimConfig {
    use scaling_reference as r;
    SimConfig {
        params: ModelParams {
            domain: Domain::reflecting_box(1, [r::LO, 0.0], [r::HI, 0.0]),
            counting: CountingDistribution::NegativeBinomial { mu1: 1.0, mu2: 25.0 },
            kernel: gdm_core::kernels::DispersalKernel::exponential(r::KERNEL_BETA, 1),
            rate: MaturationRate::Constant { value: 1.0 },
            diffusion: DiffusionSpec::Constant { sigma2: r::SIGMA2 },
            release_rate: 1.0,
            kernel_normalization: Normalization::Renormalize,
        },
        k,
        stop: StopRule::at_time(defaults::SCALING_T),
        dt_max: 0.02,
        scheme: EventScheme::Thinning,
        snapshot_every: None,
    }
}

/// Limit plant density at T, averaged over histogram cells. Solves the full
/// system at a resolution whose nodes align with the cell edges, then takes
/// trapezoid cell averages.
fn scaling_reference_cells(cells: usize) -> Vec<f64> {
    use scaling_reference as r;
    let n = r::PDE_NODES;
    assert_eq!((n - 1) % cells, 0, "cell edges must land on solver nodes");
    let grid = Grid::new(n, n, r::LO, r::HI, BoundaryCondition::Neumann);
    let f0: Vec<f64> = (0..n)
        .map(|j| {
            let y: f64 = grid.y(j);
            // Half density at the jump nodes keeps the trapezoid mass exact.
            if (y.abs() - r::F0_HALF_WIDTH).abs() < 1e-12 {
                r::F0_DENSITY / 2.0
            } else if y.abs() < r::F0_HALF_WIDTH {
                r::F0_DENSITY
            } else {
                0.0
            }
        })
        .collect();
    let mut state = PdeState::new(
        grid,
        f0,
        |_, _| 1.0,
        |x, y| (-(y - x).abs() / r::KERNEL_BETA).exp(),
        true,
        r::SIGMA2 / 2.0,
        0.0,
        1.0,
    );
    let n_steps = (defaults::SCALING_T / r::PDE_DT).round() as usize;
    run_direct(&mut state, r::PDE_DT, n_steps);

    let per = (n - 1) / cells;
    let h = (r::HI - r::LO) / (n - 1) as f64;
    let width = per as f64 * h;
    (0..cells)
        .map(|c| {
            let a = c * per;
            let inner: f64 = state.f[a + 1..a + per].iter().sum();
            (state.f[a] / 2.0 + inner + state.f[a + per] / 2.0) * h / width
        })
        .collect()
}

/// Law-of-large-numbers study: as the founding population K grows, the
/// plant histogram at T approaches the solver density (mean L1 distance
/// decreasing, final value below `SCALING_L1_MAX`) and the scaled count
/// variance obeys the 1/K law (`K * Var` constant within
/// `SCALING_VAR_FACTOR`).
pub fn scaling_convergence(settings: &ScalingSettings, seed: u64) -> StudyReport {
    use scaling_reference as r;
    assert!(settings.k_list.len() >= 2 && settings.replicas >= 2);
    let grid_spec = GridSpec::new(1, [r::LO, 0.0], [r::HI, 0.0], [settings.cells, 1]);
    let reference =
        Histogram::from_values(grid_spec, scaling_reference_cells(settings.cells));

    let replicas = settings.replicas;
    let mut cases = Vec::new();
    let mut mean_l1s = Vec::new();
    let mut var_ks = Vec::new();
    for (ki, &k) in settings.k_list.iter().enumerate() {
        let config = scaling_sim_config(k);
        let start = Instant::now();
        let per_replica: Vec<(f64, f64)> = (0..replicas)
            .into_par_iter()
            .map(|rep| {
                let mut rng = RngStream::new(seed, (ki * replicas + rep) as u64);
                let positions: Vec<Point> = (0..k)
                    .map(|_| [rng.random_range(-r::F0_HALF_WIDTH..r::F0_HALF_WIDTH), 0.0])
                    .collect();
                let state = SimState::new(
                    PlantPopulation::new(positions),
                    SeedPopulation::new(),
                    k,
                    rng,
                );
                let traj = run(&config, state).expect("boxed run");
                let plants = &traj.final_state.plants.positions;
                let hist = histogram_measure(plants, &grid_spec, k as f64);
                let l1 = l1_distance(&hist, &reference).expect("matching grids");
                (l1, plants.len() as f64 / k as f64)
            })
            .collect();
        let runtime = start.elapsed().as_secs_f64();

        let l1s: Vec<f64> = per_replica.iter().map(|&(l1, _)| l1).collect();
        let masses: Vec<f64> = per_replica.iter().map(|&(_, m)| m).collect();
        let (mean_l1, se_l1) = mean_and_se(&l1s);
        let (mean_mass, _) = mean_and_se(&masses);
        let var = masses.iter().map(|m| (m - mean_mass) * (m - mean_mass)).sum::<f64>()
            / (replicas - 1) as f64;
        let var_k = var * k as f64;
        mean_l1s.push(mean_l1);
        var_ks.push(var_k);
        cases.push(json!({
            "k": k,
            "mean_l1": mean_l1,
            "se_l1": se_l1,
            "mean_scaled_plants": mean_mass,
            "var_times_k": var_k,
            "runtime_seconds": runtime,
        }));
    }

    let decreasing = mean_l1s.windows(2).all(|w| w[1] < w[0]);
    let last = *mean_l1s.last().expect("nonempty");
    let (var_min, var_max) = var_ks
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let checks = vec![
        Check::new(
            "scaling-l1-decreasing",
            decreasing,
            format!("mean L1 over K {:?}: {mean_l1s:?}", settings.k_list),
        ),
        Check::new(
            "scaling-l1-threshold",
            last <= settings.l1_max,
            format!("largest-K mean L1 {last:.4} vs threshold {}", settings.l1_max),
        ),
        Check::new(
            "scaling-var-k",
            var_max <= defaults::SCALING_VAR_FACTOR * var_min,
            format!(
                "K*Var in [{var_min:.3}, {var_max:.3}], ratio {:.2} vs factor {}",
                var_max / var_min,
                defaults::SCALING_VAR_FACTOR
            ),
        ),
    ];
    StudyReport::assemble(
        "scaling",
        seed,
        json!({
            "k_list": settings.k_list,
            "replicas": replicas,
            "t_horizon": defaults::SCALING_T,
            "histogram_cells": settings.cells,
            "l1_threshold": settings.l1_max,
            "pde_nodes": r::PDE_NODES,
            "pde_dt": r::PDE_DT,
        }),
        cases,
        checks,
    )
}

/// Shared 1D reference problem for the solver studies: reflecting walls on
/// [-10, 10], squared-cosine initial plants, distance-proportional rate,
/// renormalized exponential kernel, sigma^2 = 5.
pub fn reference_state(n: usize, epsilon: f64) -> PdeState {
    let grid = Grid::new(n, n, -10.0, 10.0, BoundaryCondition::Neumann);
    let f0: Vec<f64> = (0..n)
        .map(|j| {
            let y: f64 = grid.y(j);
            if y.abs() < 5.0 {
                let c = (std::f64::consts::PI * y / 10.0).cos();
                c * c
            } else {
                0.0
            }
        })
        .collect();
    PdeState::new(
        grid,
        f0,
        |x, y| 0.05 * (y - x).abs(),
        |x, y| (-(y - x).abs() / 2.5).exp(),
        true,
        2.5,
        epsilon,
        1.0,
    )
}

const EPSILON_STUDY_N: usize = 64;
const EPSILON_STUDY_DT: f64 = 0.02;
const EPSILON_STUDY_STEPS: usize = 25;

fn weighted_l2_diff(state: &PdeState, a: &[f64], b: &[f64]) -> f64 {
    let wx = state.grid.weights_x();
    let wy = state.grid.weights_y();
    let ny = state.grid.ny;
    let mut sum = 0.0;
    for (i, wi) in wx.iter().enumerate() {
        for (j, wj) in wy.iter().enumerate() {
            let d = a[i * ny + j] - b[i * ny + j];
            sum += wi * wj * d * d;
        }
    }
    sum.sqrt()
}

/// First iterate of the monotone scheme at viscosity `epsilon`: the seed
/// field driven by plants frozen at their initial density.
fn frozen_plant_g(epsilon: f64, dt: f64, n_steps: usize) -> Vec<f64> {
    let mut state = reference_state(EPSILON_STUDY_N, epsilon);
    let f0 = state.f.clone();
    for _ in 0..n_steps {
        step_viscous(&mut state, dt);
        state.f = f0.clone();
    }
    state.g
}

/// Vanishing-viscosity study: the regularized seed field must approach the
/// degenerate one as epsilon shrinks along the given list, and must stay
/// above its frozen-plant first iterate (same epsilon) nodewise.
pub fn epsilon_study(epsilons: &[f64]) -> StudyReport {
    assert!(epsilons.len() >= 2 && epsilons.iter().all(|&e| e > 0.0));
    let (dt, n_steps) = (EPSILON_STUDY_DT, EPSILON_STUDY_STEPS);
    let mut base = reference_state(EPSILON_STUDY_N, 0.0);
    for _ in 0..n_steps {
        step_viscous(&mut base, dt);
    }

    let mut cases = Vec::new();
    let mut distances = Vec::new();
    let mut margins = Vec::new();
    for &eps in epsilons {
        let start = Instant::now();
        let mut state = reference_state(EPSILON_STUDY_N, eps);
        for _ in 0..n_steps {
            step_viscous(&mut state, dt);
        }
        let g1 = frozen_plant_g(eps, dt, n_steps);
        let distance = weighted_l2_diff(&base, &state.g, &base.g);
        let margin = state
            .g
            .iter()
            .zip(&g1)
            .map(|(a, b)| a - b)
            .fold(f64::INFINITY, f64::min);
        let runtime = start.elapsed().as_secs_f64();
        distances.push(distance);
        margins.push(margin);
        cases.push(json!({
            "epsilon": eps,
            "distance_to_degenerate": distance,
            "lower_margin": margin,
            "runtime_seconds": runtime,
        }));
    }

    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::new(
            "viscous-distance-decreasing",
            decreasing,
            format!("|g_eps - g_0|_2 over eps {epsilons:?}: {distances:?}"),
        ),
        Check::new(
            "viscous-g1-lower-bound",
            worst >= -defaults::VISCOUS_LOWER_TOL,
            format!(
                "worst nodewise margin above the first iterate {worst:.2e} vs -{:.0e}",
                defaults::VISCOUS_LOWER_TOL
            ),
        ),
    ];
    StudyReport::assemble(
        "epsilon",
        0,
        json!({
            "epsilons": epsilons,
            "grid_nodes": EPSILON_STUDY_N,
            "dt": dt,
            "steps": n_steps,
        }),
        cases,
        checks,
    )
}

const PICARD_STUDY_N: usize = 64;
const PICARD_STUDY_DT: f64 = 0.02;
const PICARD_STUDY_STEPS: usize = 50;

/// Uniqueness cross-check: the Picard fixed point and the direct recursion
/// must land on the same fields at T, and the iterates must be monotone.
pub fn picard_vs_direct() -> Result<StudyReport, PicardError> {
    let initial = reference_state(PICARD_STUDY_N, 0.0);
    let start = Instant::now();
    let outcome = picard_solve(&initial, PICARD_STUDY_DT, PICARD_STUDY_STEPS, 40, 1e-10)?;
    let mut direct = initial.clone();
    run_direct(&mut direct, PICARD_STUDY_DT, PICARD_STUDY_STEPS);
    let runtime = start.elapsed().as_secs_f64();

    let linf = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let linf_f = linf(&outcome.f, &direct.f);
    let linf_g = linf(&outcome.g, &direct.g);
    let wy = direct.grid.weights_y();
    let l2_f = outcome
        .f
        .iter()
        .zip(&direct.f)
        .zip(&wy)
        .map(|((a, b), w)| w * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let l2_g = weighted_l2_diff(&direct, &outcome.g, &direct.g);
    let min_increment = outcome
        .min_increments
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    let checks = vec![
        Check::new(
            "picard-direct-linf",
            linf_f.max(linf_g) < defaults::PICARD_LINF_MAX,
            format!(
                "sup |picard - direct|: f {linf_f:.2e}, g {linf_g:.2e} vs {:.0e}",
                defaults::PICARD_LINF_MAX
            ),
        ),
        Check::new(
            "picard-direct-l2",
            l2_f.max(l2_g) < defaults::PICARD_L2_MAX,
            format!(
                "L2 |picard - direct|: f {l2_f:.2e}, g {l2_g:.2e} vs {:.0e}",
                defaults::PICARD_L2_MAX
            ),
        ),
        Check::new(
            "picard-monotone",
            min_increment >= -defaults::PICARD_MONOTONE_TOL,
            format!(
                "worst nodewise iterate increment {min_increment:.2e} vs -{:.0e}",
                defaults::PICARD_MONOTONE_TOL
            ),
        ),
    ];
    let cases = vec![json!({
        "iterations": outcome.iterations,
        "linf_f": linf_f,
        "linf_g": linf_g,
        "l2_f": l2_f,
        "l2_g": l2_g,
        "min_increment": min_increment,
        "runtime_seconds": runtime,
    })];
    Ok(StudyReport::assemble(
        "picard",
        0,
        json!({
            "grid_nodes": PICARD_STUDY_N,
            "dt": PICARD_STUDY_DT,
            "steps": PICARD_STUDY_STEPS,
            "tolerance": 1e-10,
        }),
        cases,
        checks,
    ))
}

/// Study failures the driver must tell apart: bad knobs versus an honest
/// non-convergence.
#[derive(Debug)]
pub enum StudyError {
    Config(crate::config::ConfigError),
    Picard(PicardError),
}

impl std::fmt::Display for StudyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StudyError::Config(e) => write!(f, "{e}"),
            StudyError::Picard(e) => write!(f, "{e}"),
        }
    }
}

fn knob_error(message: String) -> StudyError {
    StudyError::Config(crate::config::ConfigError::Invalid(vec![message]))
}

/// Dispatches a named study, honoring the optional `study` config section.
pub fn run_study(
    name: &str,
    cfg: &crate::config::FileConfig,
    seed: u64,
) -> Result<StudyReport, StudyError> {
    let section = cfg.study.as_ref();
    match name {
        "moments" => {
            let counting = match &cfg.counting {
                Some(section) => {
                    let c = crate::config::counting_distribution(section);
                    if !(c.mean() > 0.0) {
                        return Err(knob_error(
                            "the moment study needs a counting law with positive mean".into(),
                        ));
                    }
                    c
                }
                None => CountingDistribution::NegativeBinomial { mu1: 1.0, mu2: 25.0 },
            };
            if let Some(rate) = &cfg.rate {
                let unit = matches!(rate, crate::config::RateSection::Constant { value } if *value == 1.0);
                if !unit {
                    return Err(knob_error(
                        "the moment study compares against the unit-rate oracle; rate must be \
                         constant 1"
                            .into(),
                    ));
                }
            }
            let t_checks = section
                .and_then(|s| s.t_checks.clone())
                .unwrap_or_else(|| defaults::MOMENT_T_CHECKS.to_vec());
            if t_checks.is_empty() || t_checks.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
                return Err(knob_error("study.t_checks must be positive times".into()));
            }
            let replicas = section.and_then(|s| s.replicas).unwrap_or(defaults::MOMENT_REPLICAS);
            if replicas < 2 {
                return Err(knob_error("study.replicas must be at least 2".into()));
            }
            Ok(moment_validation(counting, &t_checks, replicas, seed))
        }
        "scaling" => {
            let mut settings = ScalingSettings::default();
            if let Some(s) = section {
                if let Some(k_list) = &s.k_list {
                    settings.k_list = k_list.clone();
                }
                if let Some(r) = s.replicas {
                    settings.replicas = r;
                }
                if let Some(c) = s.histogram_cells {
                    settings.cells = c;
                }
                if let Some(l) = s.l1_threshold {
                    settings.l1_max = l;
                }
            }
            if settings.k_list.len() < 2
                || settings.k_list.windows(2).any(|w| w[1] <= w[0])
                || settings.k_list[0] == 0
            {
                return Err(knob_error(
                    "study.k_list must be strictly increasing positive counts (at least two)"
                        .into(),
                ));
            }
            if settings.replicas < 2 {
                return Err(knob_error("study.replicas must be at least 2".into()));
            }
            if settings.cells == 0 || (scaling_reference::PDE_NODES - 1) % settings.cells != 0 {
                return Err(knob_error(format!(
                    "study.histogram_cells must divide {} so cell edges land on solver nodes",
                    scaling_reference::PDE_NODES - 1
                )));
            }
            Ok(scaling_convergence(&settings, seed))
        }
        "epsilon" => {
            let epsilons = section
                .and_then(|s| s.epsilons.clone())
                .unwrap_or_else(|| defaults::EPSILON_LIST.to_vec());
            if epsilons.len() < 2 || epsilons.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
                return Err(knob_error(
                    "study.epsilons must be at least two positive viscosities".into(),
                ));
            }
            Ok(epsilon_study(&epsilons))
        }
        "picard" => picard_vs_direct().map_err(StudyError::Picard),
        other => Err(knob_error(format!(
            "unknown study \"{other}\" (expected moments, scaling, epsilon, or picard)"
        ))),
    }
}
