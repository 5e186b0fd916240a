//! Model parameter records and configuration validation.
//!
//! `validate` enforces the standing assumptions of the model: the counting
//! distribution has finite first and second moments, the dispersal kernel is
//! a probability density, and the maturation rate is nonnegative and
//! uniformly bounded.

use crate::domain::{Boundary, Domain, DomainKind, Point};
use crate::float;
use crate::kernels::DispersalKernel;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

/// Law of the group size `kappa` (0 allowed: an empty group).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountingDistribution {
    /// Mean `mu1 > 0`, variance `mu2 > mu1`; size parameter
    /// `s = mu1^2/(mu2 - mu1)`, sampled as a gamma-mixed Poisson.
    NegativeBinomial { mu1: f64, mu2: f64 },
    Poisson { mu1: f64 },
    Fixed { n: u64 },
}

impl CountingDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            CountingDistribution::NegativeBinomial { mu1, .. } => mu1,
            CountingDistribution::Poisson { mu1 } => mu1,
            CountingDistribution::Fixed { n } => n as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            CountingDistribution::NegativeBinomial { mu2, .. } => mu2,
            CountingDistribution::Poisson { mu1 } => mu1,
            CountingDistribution::Fixed { .. } => 0.0,
        }
    }

    /// Negative-binomial size parameter `s = mu1^2/(mu2-mu1)`.
    pub fn nb_size(&self) -> Option<f64> {
        match *self {
            CountingDistribution::NegativeBinomial { mu1, mu2 } => {
                Some(mu1 * mu1 / (mu2 - mu1))
            }
            _ => None,
        }
    }
}

/// Maturation rate `lambda(x, y)` of a seed with origin `x` at position `y`,
/// with its precomputed uniform bound.
#[derive(Debug, Clone, PartialEq)]
pub enum MaturationRate {
    Constant { value: f64 },
    /// `lambda0 * |y - x|`; bounded by `lambda0 * diameter` on a box.
    DistanceProportional { lambda0: f64 },
    /// Bilinear interpolation of a table over origin x position (d = 1 only;
    /// the d = 2 table would be four-dimensional).
    Tabulated(RateTable),
}

/// Uniform table of rate values on `[lo, hi]^2`, origin-major:
/// `values[i * ny + j] = lambda(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub lo: f64,
    pub hi: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl RateTable {
    /// Bilinear interpolation; arguments clamped into the table range.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let hx = (self.hi - self.lo) / (self.nx - 1) as f64;
        let hy = (self.hi - self.lo) / (self.ny - 1) as f64;
        let tx = ((x - self.lo) / hx).clamp(0.0, (self.nx - 1) as f64);
        let ty = ((y - self.lo) / hy).clamp(0.0, (self.ny - 1) as f64);
        let i = (float::floor(tx) as usize).min(self.nx - 2);
        let j = (float::floor(ty) as usize).min(self.ny - 2);
        let ax = tx - i as f64;
        let ay = ty - j as f64;
        let v = |i: usize, j: usize| self.values[i * self.ny + j];
        (1.0 - ax) * ((1.0 - ay) * v(i, j) + ay * v(i, j + 1))
            + ax * ((1.0 - ay) * v(i + 1, j) + ay * v(i + 1, j + 1))
    }
}

impl MaturationRate {
    /// Uniform bound `sup lambda`; `None` when unbounded on the domain
    /// (distance-proportional rate on all-space with `lambda0 > 0`).
    pub fn bound(&self, domain: &Domain) -> Option<f64> {
        match self {
            MaturationRate::Constant { value } => Some(*value),
            MaturationRate::DistanceProportional { lambda0 } => {
                if *lambda0 == 0.0 {
                    Some(0.0)
                } else {
                    domain.diameter().map(|d| lambda0 * d)
                }
            }
            // interpolation never exceeds the table maximum
            MaturationRate::Tabulated(t) => {
                Some(t.values.iter().fold(0.0f64, |m, &v| m.max(v)))
            }
        }
    }

    pub fn eval(&self, x: Point, y: Point, dimension: usize) -> f64 {
        match self {
            MaturationRate::Constant { value } => *value,
            MaturationRate::DistanceProportional { lambda0 } => {
                lambda0 * float::dist(x, y, dimension)
            }
            MaturationRate::Tabulated(t) => t.eval(x[0], y[0]),
        }
    }
}

/// Seed motion between events: an Ito diffusion `dy = a(y) dt + sigma(y) dW`.
/// The constant fast path (`a = 0`, scalar `sigma`) is the one exposed to
/// configuration files; general coefficients are function pointers.
#[derive(Debug, Clone, Copy)]
pub enum DiffusionSpec {
    Constant { sigma2: f64 },
    Varying { drift: fn(Point) -> Point, sigma: fn(Point) -> f64 },
}

/// Whether kernel densities are the free-space closed forms or are divided
/// by the domain-truncation mass so they integrate to 1 over the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Renormalize,
    Raw,
}

#[derive(Debug, Clone)]
pub struct ModelParams {
    pub domain: Domain,
    pub counting: CountingDistribution,
    pub kernel: DispersalKernel,
    pub rate: MaturationRate,
    pub diffusion: DiffusionSpec,
    /// Group-release rate per plant per unit time.
    pub release_rate: f64,
    pub kernel_normalization: Normalization,
}

/// One failed check, naming the standing-assumption item it falls under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub assumption: &'static str,
    pub message: String,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "[{}] {}", self.assumption, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

const COUNTING: &str = "counting moments";
const KERNEL: &str = "dispersal density";
const RATE: &str = "rate bound";
const DOMAIN: &str = "domain";

pub fn validate(params: &ModelParams) -> ValidationResult {
    let mut v = Vec::new();
    let mut push = |assumption, message| v.push(Violation { assumption, message });

    let d = params.domain.dimension;
    if d == 0 || d > crate::domain::MAX_DIM {
        push(DOMAIN, format!("dimension must be 1 or 2, got {d}"));
    }
    match params.domain.kind {
        DomainKind::Box { lower, upper } => {
            for i in 0..d.min(crate::domain::MAX_DIM) {
                if !(lower[i] < upper[i]) {
                    push(
                        DOMAIN,
                        format!("box axis {i} needs lower < upper, got [{}, {}]", lower[i], upper[i]),
                    );
                }
            }
            if params.domain.boundary == Boundary::None {
                push(DOMAIN, String::from("boundary 'none' is only valid with all-space"));
            }
        }
        DomainKind::AllSpace => {
            if params.domain.boundary != Boundary::None {
                push(DOMAIN, String::from("all-space admits no reflect/kill boundary"));
            }
        }
    }

    match params.counting {
        CountingDistribution::NegativeBinomial { mu1, mu2 } => {
            if !(mu1 > 0.0) || !mu1.is_finite() {
                push(COUNTING, format!("counting mean must be positive and finite, got {mu1}"));
            }
            if !(mu2 > mu1) {
                push(COUNTING, format!("counting variance must exceed mean ({mu2} <= {mu1})"));
            } else if !mu2.is_finite() {
                push(COUNTING, String::from("counting variance must be finite"));
            }
        }
        CountingDistribution::Poisson { mu1 } => {
            if !(mu1 > 0.0) || !mu1.is_finite() {
                push(COUNTING, format!("counting mean must be positive and finite, got {mu1}"));
            }
        }
        CountingDistribution::Fixed { n } => {
            if n == 0 {
                push(COUNTING, String::from("fixed group size must be >= 1"));
            }
        }
    }

    if let Err(msg) = params.kernel.check(d) {
        push(KERNEL, msg);
    }
    if params.kernel_normalization == Normalization::Renormalize
        && params.domain.kind == DomainKind::AllSpace
    {
        push(KERNEL, String::from("renormalize-on-domain requires a box domain"));
    }

    match &params.rate {
        MaturationRate::Constant { value } => {
            if !(*value >= 0.0) || !value.is_finite() {
                push(RATE, format!("lambda must be nonnegative and finite, got {value}"));
            }
        }
        MaturationRate::DistanceProportional { lambda0 } => {
            if !(*lambda0 >= 0.0) || !lambda0.is_finite() {
                push(RATE, format!("lambda0 must be nonnegative and finite, got {lambda0}"));
            }
        }
        MaturationRate::Tabulated(t) => {
            if d != 1 {
                push(RATE, String::from("tabulated rate is only supported in dimension 1"));
            }
            if t.nx < 2 || t.ny < 2 || t.values.len() != t.nx * t.ny {
                push(RATE, format!(
                    "rate table shape mismatch: {}x{} with {} values",
                    t.nx, t.ny, t.values.len()
                ));
            }
            if !(t.lo < t.hi) {
                push(RATE, format!("rate table needs lo < hi, got [{}, {}]", t.lo, t.hi));
            }
            if t.values.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                push(RATE, String::from("lambda must be nonnegative (negative or non-finite table entry)"));
            }
        }
    }
    if params.rate.bound(&params.domain).is_none() {
        push(RATE, String::from("lambda must be uniformly bounded (distance-proportional rate on all-space is not)"));
    }

    match params.diffusion {
        DiffusionSpec::Constant { sigma2 } => {
            if !(sigma2 >= 0.0) || !sigma2.is_finite() {
                push(RATE, format!("sigma^2 must be nonnegative and finite, got {sigma2}"));
            }
        }
        DiffusionSpec::Varying { sigma, .. } => {
            // probe a coarse lattice; runtime debug assertions cover the rest
            if let DomainKind::Box { lower, upper } = params.domain.kind {
                'probe: for i in 0..17 {
                    for j in 0..if d == 2 { 17 } else { 1 } {
                        let mut p = [0.0; 2];
                        p[0] = lower[0] + (upper[0] - lower[0]) * i as f64 / 16.0;
                        if d == 2 {
                            p[1] = lower[1] + (upper[1] - lower[1]) * j as f64 / 16.0;
                        }
                        if sigma(p) < 0.0 {
                            push(RATE, format!("sigma must be nonnegative on the domain (sigma({:?}) < 0)", p));
                            break 'probe;
                        }
                    }
                }
            }
        }
    }

    if !(params.release_rate >= 0.0) || !params.release_rate.is_finite() {
        push(DOMAIN, format!("release rate must be nonnegative and finite, got {}", params.release_rate));
    }

    ValidationResult { violations: v }
}
