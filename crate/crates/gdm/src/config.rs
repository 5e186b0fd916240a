//! JSON run configuration shared by every subcommand.
//!
//! One file describes the model (domain, counting law, kernel, rate,
//! diffusion) plus optional `simulation`, `pde`, and `study` sections.
//! Parsing is strict: unknown keys are rejected with the parser's
//! line/column, and semantic problems are collected into a diagnostic
//! list rather than failing one at a time.

use std::fmt;
use std::fs;
use std::path::Path;

use gdm_core::domain::{Boundary, Domain, DomainKind, Point};
use gdm_core::kernels::DispersalKernel;
use gdm_core::params::{
    validate, CountingDistribution, DiffusionSpec, MaturationRate, ModelParams, Normalization,
    RateTable,
};
use gdm_core::pde::{BoundaryCondition, Grid, PdeState, ReducedState};
use gdm_core::sim::{EventScheme, SimConfig, StopRule};
use serde::Deserialize;

#[derive(Debug)]
pub enum ConfigError {
    /// Malformed JSON or schema mismatch, with the parser position.
    Parse { line: usize, column: usize, message: String },
    /// Semantic problems; one message per violated requirement.
    Invalid(Vec<String>),
}

impl ConfigError {
    pub fn invalid(message: impl Into<String>) -> Self {
        ConfigError::Invalid(vec![message.into()])
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Invalid(messages) => {
                writeln!(f, "invalid config:")?;
                for m in messages {
                    writeln!(f, "  - {m}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub domain: Option<DomainSection>,
    #[serde(default)]
    pub counting: Option<CountingSection>,
    #[serde(default)]
    pub kernel: Option<KernelSection>,
    /// "renormalize" or "raw"; defaults to renormalize on boxes, raw on
    /// all-space.
    #[serde(default)]
    pub normalization: Option<String>,
    #[serde(default)]
    pub rate: Option<RateSection>,
    #[serde(default)]
    pub diffusion: Option<DiffusionSection>,
    #[serde(default)]
    pub release_rate: Option<f64>,
    #[serde(default)]
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub pde: Option<PdeSection>,
    #[serde(default)]
    pub study: Option<StudySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub dimension: usize,
    pub kind: DomainKindSection,
    /// "reflect", "kill", or "none"; defaults to reflect on boxes, none on
    /// all-space.
    #[serde(default)]
    pub boundary: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKindSection {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    #[serde(alias = "all-space")]
    AllSpace,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CountingSection {
    #[serde(alias = "negative-binomial")]
    NegativeBinomial { mu1: f64, mu2: f64 },
    Poisson { mu1: f64 },
    Fixed { n: u64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    /// "exponential", "gaussian", or "power_law".
    pub kind: String,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Tail exponent; power-law kernels only.
    #[serde(default)]
    pub a: Option<f64>,
    /// Alternative to `beta`: calibrate the scale so the free-space mean
    /// displacement equals this value.
    #[serde(default)]
    pub mean_displacement: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateSection {
    Constant { value: f64 },
    #[serde(alias = "distance-proportional")]
    DistanceProportional { lambda0: f64 },
    Tabulated { lo: f64, hi: f64, nx: usize, ny: usize, values: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSection {
    pub sigma2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// Scaling parameter (individual weight 1/k); defaults to the number of
    /// initial plants.
    #[serde(default)]
    pub k: Option<u64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub plant_target: Option<usize>,
    #[serde(default)]
    pub dt_max: Option<f64>,
    /// "thinning" (default) or "algorithm1".
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default)]
    pub snapshot_every: Option<f64>,
    /// Emit a KDE intensity grid of the final plant pattern with this many
    /// cells per axis (2D runs only).
    #[serde(default)]
    pub kde_cells: Option<Vec<usize>>,
    /// Initial plant positions; defaults to a single plant at the origin.
    #[serde(default)]
    pub initial_plants: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// "neumann" or "dirichlet"; defaults to the side of the domain
    /// boundary (reflect -> neumann, kill -> dirichlet).
    #[serde(default)]
    pub bc: Option<String>,
    /// "direct", "viscous", "picard", or "reduced".
    pub scheme: String,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub f0: Option<F0Section>,
    /// Steps between recorded snapshots; defaults to recording only the
    /// initial and final fields.
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub picard_max_iterations: Option<usize>,
    #[serde(default)]
    pub picard_tolerance: Option<f64>,
}

/// Initial plant density profile, applied per axis (2D reduced runs take
/// the product over axes).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum F0Section {
    Uniform { value: f64 },
    /// Squared-cosine window: smooth, compactly supported.
    Bump { center: f64, half_width: f64, amplitude: f64 },
    Gaussian { center: f64, sd: f64, amplitude: f64 },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default)]
    pub replicas: Option<usize>,
    #[serde(default)]
    pub t_checks: Option<Vec<f64>>,
    #[serde(default)]
    pub k_list: Option<Vec<u64>>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub histogram_cells: Option<usize>,
    #[serde(default)]
    pub l1_threshold: Option<f64>,
}

pub fn parse(bytes: &[u8]) -> Result<FileConfig, ConfigError> {
    serde_json::from_slice(bytes).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
    let bytes = fs::read(path)
        .map_err(|e| ConfigError::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse(&bytes)
}

fn point(coords: &[f64], dimension: usize, what: &str, errs: &mut Vec<String>) -> Point {
    let mut p = [0.0; 2];
    if coords.len() != dimension {
        errs.push(format!(
            "{what} must have {dimension} coordinates (the domain dimension), got {}",
            coords.len()
        ));
    }
    for (slot, &c) in p.iter_mut().zip(coords) {
        *slot = c;
    }
    p
}

fn build_domain(section: &DomainSection, errs: &mut Vec<String>) -> Domain {
    let d = section.dimension;
    let kind = match &section.kind {
        DomainKindSection::Box { lower, upper } => DomainKind::Box {
            lower: point(lower, d, "domain.kind.box.lower", errs),
            upper: point(upper, d, "domain.kind.box.upper", errs),
        },
        DomainKindSection::AllSpace => DomainKind::AllSpace,
    };
    let boundary = match section.boundary.as_deref() {
        Some("reflect") => Boundary::Reflect,
        Some("kill") => Boundary::Kill,
        Some("none") => Boundary::None,
        Some(other) => {
            errs.push(format!(
                "domain.boundary must be \"reflect\", \"kill\", or \"none\", got \"{other}\""
            ));
            Boundary::None
        }
        None => match kind {
            DomainKind::Box { .. } => Boundary::Reflect,
            DomainKind::AllSpace => Boundary::None,
        },
    };
    Domain { dimension: d, kind, boundary }
}

pub fn counting_distribution(section: &CountingSection) -> CountingDistribution {
    match *section {
        CountingSection::NegativeBinomial { mu1, mu2 } => {
            CountingDistribution::NegativeBinomial { mu1, mu2 }
        }
        CountingSection::Poisson { mu1 } => CountingDistribution::Poisson { mu1 },
        CountingSection::Fixed { n } => CountingDistribution::Fixed { n },
    }
}

fn build_kernel(
    section: &KernelSection,
    dimension: usize,
    errs: &mut Vec<String>,
) -> DispersalKernel {
    use gdm_core::kernels::KernelFamily;
    let family = match section.kind.as_str() {
        "exponential" => Some(KernelFamily::Exponential),
        "gaussian" => Some(KernelFamily::Gaussian),
        "power_law" | "power-law" => Some(KernelFamily::PowerLaw { a: section.a.unwrap_or(4.0) }),
        other => {
            errs.push(format!(
                "kernel.kind must be \"exponential\", \"gaussian\", or \"power_law\", got \"{other}\""
            ));
            None
        }
    };
    if section.a.is_some() && !matches!(family, Some(KernelFamily::PowerLaw { .. }) | None) {
        errs.push("kernel.a only applies to power-law kernels".into());
    }
    let fallback = DispersalKernel::exponential(1.0, dimension);
    let Some(family) = family else { return fallback };
    match (section.beta, section.mean_displacement) {
        (Some(_), Some(_)) => {
            errs.push("kernel: give either beta or mean_displacement, not both".into());
            fallback
        }
        (None, None) => {
            errs.push("kernel: one of beta or mean_displacement is required".into());
            fallback
        }
        (Some(beta), None) => match family {
            KernelFamily::Exponential => DispersalKernel::exponential(beta, dimension),
            KernelFamily::Gaussian => DispersalKernel::gaussian(beta, dimension),
            KernelFamily::PowerLaw { a } => DispersalKernel::power_law(beta, a, dimension),
        },
        (None, Some(m)) => match DispersalKernel::with_mean_displacement(family, m, dimension) {
            Ok(k) => k,
            Err(e) => {
                errs.push(format!("kernel: {e}"));
                fallback
            }
        },
    }
}

fn build_rate(section: &RateSection, errs: &mut Vec<String>) -> MaturationRate {
    match section {
        RateSection::Constant { value } => MaturationRate::Constant { value: *value },
        RateSection::DistanceProportional { lambda0 } => {
            MaturationRate::DistanceProportional { lambda0: *lambda0 }
        }
        RateSection::Tabulated { lo, hi, nx, ny, values } => {
            if values.len() != nx * ny {
                errs.push(format!(
                    "rate.values must have nx*ny = {} entries, got {}",
                    nx * ny,
                    values.len()
                ));
            }
            MaturationRate::Tabulated(RateTable {
                lo: *lo,
                hi: *hi,
                nx: *nx,
                ny: *ny,
                values: values.clone(),
            })
        }
    }
}

fn require<'a, T>(
    section: &'a Option<T>,
    name: &str,
    context: &str,
    errs: &mut Vec<String>,
) -> Option<&'a T> {
    if section.is_none() {
        errs.push(format!("{context} needs a \"{name}\" section"));
    }
    section.as_ref()
}

/// Builds and validates the model described by the top-level sections.
pub fn model_params(cfg: &FileConfig, context: &str) -> Result<ModelParams, ConfigError> {
    let mut errs = Vec::new();
    let domain_section = require(&cfg.domain, "domain", context, &mut errs);
    let counting_section = require(&cfg.counting, "counting", context, &mut errs);
    let kernel_section = require(&cfg.kernel, "kernel", context, &mut errs);
    let rate_section = require(&cfg.rate, "rate", context, &mut errs);
    let diffusion_section = require(&cfg.diffusion, "diffusion", context, &mut errs);
    let (Some(ds), Some(cs), Some(ks), Some(rs), Some(fs)) =
        (domain_section, counting_section, kernel_section, rate_section, diffusion_section)
    else {
        return Err(ConfigError::Invalid(errs));
    };

    let domain = build_domain(ds, &mut errs);
    let normalization = match cfg.normalization.as_deref() {
        Some("renormalize") => Normalization::Renormalize,
        Some("raw") => Normalization::Raw,
        Some(other) => {
            errs.push(format!(
                "normalization must be \"renormalize\" or \"raw\", got \"{other}\""
            ));
            Normalization::Raw
        }
        None => match domain.kind {
            DomainKind::Box { .. } => Normalization::Renormalize,
            DomainKind::AllSpace => Normalization::Raw,
        },
    };
    let params = ModelParams {
        kernel: build_kernel(ks, domain.dimension, &mut errs),
        counting: counting_distribution(cs),
        rate: build_rate(rs, &mut errs),
        diffusion: DiffusionSpec::Constant { sigma2: fs.sigma2 },
        release_rate: cfg.release_rate.unwrap_or(1.0),
        kernel_normalization: normalization,
        domain,
    };
    for v in validate(&params).violations {
        errs.push(v.to_string());
    }
    if errs.is_empty() {
        Ok(params)
    } else {
        Err(ConfigError::Invalid(errs))
    }
}

/// Everything `cmd_simulate` needs beyond the core config: the initial
/// population and the optional KDE request.
#[derive(Debug, Clone)]
pub struct SimPlan {
    pub config: SimConfig,
    pub initial_plants: Vec<Point>,
    pub kde_cells: Option<[usize; 2]>,
}

pub fn sim_plan(cfg: &FileConfig) -> Result<SimPlan, ConfigError> {
    let params = model_params(cfg, "simulate")?;
    let mut errs = Vec::new();
    let Some(sim) = &cfg.simulation else {
        return Err(ConfigError::invalid("simulate needs a \"simulation\" section"));
    };

    let dimension = params.domain.dimension;
    let initial_plants: Vec<Point> = match &sim.initial_plants {
        None => vec![[0.0; 2]],
        Some(list) => {
            if list.is_empty() {
                errs.push("simulation.initial_plants must not be empty".into());
            }
            list.iter()
                .enumerate()
                .map(|(i, coords)| {
                    let p = point(coords, dimension, "simulation.initial_plants entry", &mut errs);
                    if !params.domain.contains(p) {
                        errs.push(format!("simulation.initial_plants[{i}] lies outside the domain"));
                    }
                    p
                })
                .collect()
        }
    };

    let stop = StopRule { t_max: sim.t_max, plant_target: sim.plant_target };
    if stop.t_max.is_none() && stop.plant_target.is_none() {
        errs.push("simulation needs t_max or plant_target (or both)".into());
    }
    if let Some(t) = stop.t_max {
        if !(t > 0.0) || !t.is_finite() {
            errs.push(format!("simulation.t_max must be positive and finite, got {t}"));
        }
    }

    let scheme = match sim.scheme.as_deref() {
        None | Some("thinning") => EventScheme::Thinning,
        Some("algorithm1") => EventScheme::Algorithm1,
        Some(other) => {
            errs.push(format!(
                "simulation.scheme must be \"thinning\" or \"algorithm1\", got \"{other}\""
            ));
            EventScheme::Thinning
        }
    };

    let dt_max = sim.dt_max.unwrap_or(0.1);
    if !(dt_max > 0.0) || !dt_max.is_finite() {
        errs.push(format!("simulation.dt_max must be positive and finite, got {dt_max}"));
    }

    let kde_cells = match &sim.kde_cells {
        None => None,
        Some(cells) => {
            if dimension != 2 {
                errs.push("simulation.kde_cells needs a two-dimensional domain".into());
            }
            if cells.len() != 2 || cells.iter().any(|&c| c < 2) {
                errs.push("simulation.kde_cells must be two per-axis counts, each >= 2".into());
                None
            } else {
                Some([cells[0], cells[1]])
            }
        }
    };
    if kde_cells.is_some() && !matches!(params.domain.kind, DomainKind::Box { .. }) {
        errs.push("simulation.kde_cells needs a box domain for the grid extent".into());
    }

    let k = sim.k.unwrap_or(initial_plants.len() as u64);
    if k == 0 {
        errs.push("simulation.k must be at least 1".into());
    }

    if !errs.is_empty() {
        return Err(ConfigError::Invalid(errs));
    }
    Ok(SimPlan {
        config: SimConfig {
            params,
            k,
            stop,
            dt_max,
            scheme,
            snapshot_every: sim.snapshot_every,
        },
        initial_plants,
        kde_cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FullScheme {
    Direct,
    Viscous,
    Picard { n_max: usize, tol: f64 },
}

/// A ready-to-run solver job: the initial state plus stepping plan.
pub enum PdePlan {
    Full {
        state: PdeState,
        scheme: FullScheme,
        dt: f64,
        n_steps: usize,
        record_every: usize,
    },
    Reduced {
        state: ReducedState,
        dt: f64,
        n_steps: usize,
        record_every: usize,
    },
}

fn f0_profile(section: F0Section) -> impl Fn(f64) -> f64 {
    move |u| match section {
        F0Section::Uniform { value } => value,
        F0Section::Bump { center, half_width, amplitude } => {
            let s = (u - center) / half_width;
            if s.abs() < 1.0 {
                let c = (core::f64::consts::FRAC_PI_2 * s).cos();
                amplitude * c * c
            } else {
                0.0
            }
        }
        F0Section::Gaussian { center, sd, amplitude } => {
            let s = (u - center) / sd;
            amplitude * (-0.5 * s * s).exp()
        }
    }
}

pub fn pde_plan(cfg: &FileConfig) -> Result<PdePlan, ConfigError> {
    let params = model_params(cfg, "pde")?;
    let Some(pde) = &cfg.pde else {
        return Err(ConfigError::invalid("pde needs a \"pde\" section"));
    };
    let mut errs = Vec::new();

    let DomainKind::Box { lower, upper } = params.domain.kind else {
        return Err(ConfigError::invalid("the solver needs a box domain for the grid extent"));
    };
    let dimension = params.domain.dimension;
    let (lo, hi) = (lower[0], upper[0]);

    let bc = match pde.bc.as_deref() {
        Some("neumann") => BoundaryCondition::Neumann,
        Some("dirichlet") => BoundaryCondition::Dirichlet,
        Some(other) => {
            errs.push(format!("pde.bc must be \"neumann\" or \"dirichlet\", got \"{other}\""));
            BoundaryCondition::Neumann
        }
        None => match params.domain.boundary {
            Boundary::Reflect => BoundaryCondition::Neumann,
            Boundary::Kill => BoundaryCondition::Dirichlet,
            Boundary::None => {
                errs.push(
                    "pde.bc cannot be inferred from a free boundary; set \"neumann\" or \
                     \"dirichlet\""
                        .into(),
                );
                BoundaryCondition::Neumann
            }
        },
    };

    let t_max = pde.t_max.unwrap_or(1.0);
    let dt = pde.dt;
    if !(dt > 0.0) || !dt.is_finite() {
        errs.push(format!("pde.dt must be positive and finite, got {dt}"));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        errs.push(format!("pde.t_max must be positive and finite, got {t_max}"));
    }
    let steps = t_max / dt;
    let n_steps = steps.round().max(1.0) as usize;
    if (steps - n_steps as f64).abs() > 1e-9 * steps.max(1.0) {
        errs.push(format!(
            "pde.t_max must be an integer number of steps; t_max/dt = {steps} is not whole"
        ));
    }
    let record_every = pde.record_every.unwrap_or(n_steps);
    if record_every == 0 || n_steps % record_every != 0 {
        errs.push(format!(
            "pde.record_every must divide the step count {n_steps}, got {record_every}"
        ));
    }

    // Explicit reaction stability; checked here so a bad dt is a config
    // diagnostic, not a mid-run panic.
    match params.rate.bound(&params.domain) {
        Some(bound) if dt * bound >= 1.0 => {
            errs.push(format!(
                "explicit reaction needs dt * sup lambda < 1; got {} (reduce pde.dt below {})",
                dt * bound,
                1.0 / bound
            ));
        }
        Some(_) => {}
        None => errs.push("the solver needs a rate bounded on the domain".into()),
    }

    let epsilon = pde.epsilon.unwrap_or(0.0);
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        errs.push(format!("pde.epsilon must be nonnegative and finite, got {epsilon}"));
    }
    if epsilon > 0.0 && pde.scheme != "viscous" {
        errs.push("pde.epsilon > 0 needs scheme \"viscous\"".into());
    }

    let renormalize = matches!(params.kernel_normalization, Normalization::Renormalize);
    let nu = match params.diffusion {
        DiffusionSpec::Constant { sigma2 } => sigma2 / 2.0,
        _ => {
            errs.push("the solver supports constant diffusivity only".into());
            0.0
        }
    };
    let mu1 = params.counting.mean();
    let f0 = f0_profile(pde.f0.unwrap_or(F0Section::Bump {
        center: (lo + hi) / 2.0,
        half_width: (hi - lo) / 4.0,
        amplitude: 1.0,
    }));

    let full = matches!(pde.scheme.as_str(), "direct" | "viscous" | "picard");
    if full {
        if dimension != 1 {
            errs.push(
                "the coupled origin/position system is solved for one-dimensional positions; \
                 two-dimensional runs use scheme \"reduced\""
                    .into(),
            );
        }
        if pde.nx != pde.ny {
            errs.push(format!(
                "the coupled system needs matching grids, got nx = {} and ny = {}",
                pde.nx, pde.ny
            ));
        }
    } else if pde.scheme == "reduced" {
        if !matches!(params.rate, MaturationRate::Constant { .. }) {
            errs.push(
                "the reduced solver needs a position-only rate; with this rate menu that \
                 means kind \"constant\""
                    .into(),
            );
        }
        if pde.nx != pde.ny {
            errs.push("the reduced lattice uses one node count per axis; set nx equal to ny".into());
        }
        if dimension == 2 && (lower[0] != lower[1] || upper[0] != upper[1]) {
            errs.push("the reduced lattice needs a square box (equal bounds per axis)".into());
        }
    } else {
        errs.push(format!(
            "pde.scheme must be \"direct\", \"viscous\", \"picard\", or \"reduced\", got \"{}\"",
            pde.scheme
        ));
    }
    if pde.nx < 3 || pde.ny < 3 {
        errs.push(format!("the grid needs at least 3 nodes per axis, got {}x{}", pde.nx, pde.ny));
    }
    if !errs.is_empty() {
        return Err(ConfigError::Invalid(errs));
    }

    let kernel = params.kernel;
    let rate = params.rate.clone();
    if full {
        let grid = Grid::new(pde.nx, pde.ny, lo, hi, bc);
        let f0_nodes: Vec<f64> = (0..pde.ny).map(|j| f0(grid.y(j))).collect();
        let state = PdeState::new(
            grid,
            f0_nodes,
            |x, y| gdm_core::kernels::eval_rate(&rate, [x, 0.0], [y, 0.0], 1),
            |x, y| kernel.density_at_r((y - x).abs()),
            renormalize,
            nu,
            epsilon,
            mu1,
        );
        let scheme = match pde.scheme.as_str() {
            "direct" => FullScheme::Direct,
            "viscous" => FullScheme::Viscous,
            _ => FullScheme::Picard {
                n_max: pde.picard_max_iterations.unwrap_or(50),
                tol: pde.picard_tolerance.unwrap_or(1e-8),
            },
        };
        Ok(PdePlan::Full { state, scheme, dt, n_steps, record_every })
    } else {
        let n = pde.nx;
        let m = if dimension == 2 { n * n } else { n };
        let node = |p: usize| -> Point {
            let h = (hi - lo) / (n - 1) as f64;
            if dimension == 2 {
                [lo + h * (p / n) as f64, lo + h * (p % n) as f64]
            } else {
                [lo + h * p as f64, 0.0]
            }
        };
        let f0_nodes: Vec<f64> = (0..m)
            .map(|p| {
                let q = node(p);
                if dimension == 2 { f0(q[0]) * f0(q[1]) } else { f0(q[0]) }
            })
            .collect();
        let dist = move |x: Point, y: Point| {
            let dx = y[0] - x[0];
            let dy = if dimension == 2 { y[1] - x[1] } else { 0.0 };
            (dx * dx + dy * dy).sqrt()
        };
        let state = ReducedState::new(
            dimension,
            n,
            lo,
            hi,
            bc,
            f0_nodes,
            |p| gdm_core::kernels::eval_rate(&rate, p, p, dimension),
            move |x, y| kernel.density_at_r(dist(x, y)),
            renormalize,
            nu,
            mu1,
        );
        Ok(PdePlan::Reduced { state, dt, n_steps, record_every })
    }
}
