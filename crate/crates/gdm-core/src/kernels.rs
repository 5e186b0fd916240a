//! Dispersal kernels (density evaluation + exact sampling), group-size
//! sampling, and maturation-rate evaluation.
//!
//! All kernels are isotropic in `r = |x - y|`, dimensions 1 and 2:
//!
//! - exponential: `e^(-r/beta) / (2 pi beta^2)` (d=2), `e^(-|r|/beta) / (2 beta)` (d=1)
//! - gaussian: `e^(-r^2/beta^2) / (pi beta^2)` (d=2), `e^(-r^2/beta^2) / (beta sqrt(pi))` (d=1)
//! - power-law: `(a-1)(a-2) (1+r/beta)^(-a) / (2 pi beta^2)` (d=2),
//!   `(a-1) (1+|r|/beta)^(-a) / (2 beta)` (d=1), requiring `a > 2`
//!
//! Each form integrates to exactly 1 over `R^d`. Sampling is by direction
//! uniform on the sphere and radius from the closed-form radial marginal
//! (inverse CDF; the d=2 power-law CDF is inverted by safeguarded Newton),
//! with rejection against the box when the domain is bounded.

use crate::domain::{Domain, DomainKind, Point};
use crate::float;
use crate::params::{CountingDistribution, MaturationRate, Normalization};
use crate::rng::RngStream;
use alloc::format;
use alloc::string::String;
use core::f64::consts::PI;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

/// Kernel family tag for calibration and construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Exponential,
    Gaussian,
    PowerLaw { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersalKernel {
    Exponential { beta: f64, dimension: usize },
    Gaussian { beta: f64, dimension: usize },
    PowerLaw { beta: f64, a: f64, dimension: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    BadParameter(String),
    /// Power-law mean displacement diverges (d=2 needs `a > 3`, d=1 `a > 2`).
    InfiniteMean { a: f64 },
    /// Rejection sampling failed repeatedly: kernel and domain are mismatched.
    RejectionCap { cap: u32 },
}

impl core::fmt::Display for KernelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KernelError::BadParameter(m) => write!(f, "{m}"),
            KernelError::InfiniteMean { a } => {
                write!(f, "power-law exponent a={a} has no finite mean displacement")
            }
            KernelError::RejectionCap { cap } => {
                write!(f, "displacement rejected {cap} times: kernel/domain mismatch")
            }
        }
    }
}

impl DispersalKernel {
    pub fn exponential(beta: f64, dimension: usize) -> Self {
        DispersalKernel::Exponential { beta, dimension }
    }

    pub fn gaussian(beta: f64, dimension: usize) -> Self {
        DispersalKernel::Gaussian { beta, dimension }
    }

    pub fn power_law(beta: f64, a: f64, dimension: usize) -> Self {
        DispersalKernel::PowerLaw { beta, a, dimension }
    }

    /// Kernel with scale calibrated so the mean displacement is `m`.
    pub fn with_mean_displacement(
        family: KernelFamily,
        m: f64,
        dimension: usize,
    ) -> Result<Self, KernelError> {
        let beta = calibrate_beta(family, m, dimension)?;
        Ok(match family {
            KernelFamily::Exponential => DispersalKernel::Exponential { beta, dimension },
            KernelFamily::Gaussian => DispersalKernel::Gaussian { beta, dimension },
            KernelFamily::PowerLaw { a } => DispersalKernel::PowerLaw { beta, a, dimension },
        })
    }

    pub fn dimension(&self) -> usize {
        match *self {
            DispersalKernel::Exponential { dimension, .. }
            | DispersalKernel::Gaussian { dimension, .. }
            | DispersalKernel::PowerLaw { dimension, .. } => dimension,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            DispersalKernel::Exponential { beta, .. }
            | DispersalKernel::Gaussian { beta, .. }
            | DispersalKernel::PowerLaw { beta, .. } => beta,
        }
    }

    /// Parameter and dimension checks; `domain_dimension` must match.
    pub fn check(&self, domain_dimension: usize) -> Result<(), String> {
        let d = self.dimension();
        if d != 1 && d != 2 {
            return Err(format!("kernel dimension must be 1 or 2, got {d}"));
        }
        if d != domain_dimension {
            return Err(format!("kernel dimension {d} != domain dimension {domain_dimension}"));
        }
        let beta = self.beta();
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(format!("kernel beta must be positive and finite, got {beta}"));
        }
        if let DispersalKernel::PowerLaw { a, .. } = *self {
            if !(a > 2.0) || !a.is_finite() {
                return Err(format!("power-law exponent must satisfy a > 2, got {a}"));
            }
        }
        Ok(())
    }

    /// Free-space density value at separation `r >= 0`.
    pub fn density_at_r(&self, r: f64) -> f64 {
        match *self {
            DispersalKernel::Exponential { beta, dimension } => {
                let e = float::exp(-r / beta);
                if dimension == 2 {
                    e / (2.0 * PI * beta * beta)
                } else {
                    e / (2.0 * beta)
                }
            }
            DispersalKernel::Gaussian { beta, dimension } => {
                let e = float::exp(-(r * r) / (beta * beta));
                if dimension == 2 {
                    e / (PI * beta * beta)
                } else {
                    e / (beta * float::sqrt(PI))
                }
            }
            DispersalKernel::PowerLaw { beta, a, dimension } => {
                let p = float::powf(1.0 + r / beta, -a);
                if dimension == 2 {
                    (a - 1.0) * (a - 2.0) * p / (2.0 * PI * beta * beta)
                } else {
                    (a - 1.0) * p / (2.0 * beta)
                }
            }
        }
    }

    /// CDF of the sampling distance `|y - x|` in free space (closed form).
    pub fn radial_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match *self {
            DispersalKernel::Exponential { beta, dimension } => {
                let u = r / beta;
                if dimension == 2 {
                    // Gamma(2, beta)
                    1.0 - float::exp(-u) * (1.0 + u)
                } else {
                    1.0 - float::exp(-u)
                }
            }
            DispersalKernel::Gaussian { beta, dimension } => {
                let u = r / beta;
                if dimension == 2 {
                    1.0 - float::exp(-u * u)
                } else {
                    libm::erf(u)
                }
            }
            DispersalKernel::PowerLaw { beta, a, dimension } => {
                let v = 1.0 + r / beta;
                if dimension == 2 {
                    1.0 - float::powf(v, 1.0 - a) * ((a - 1.0) * v - (a - 2.0))
                } else {
                    1.0 - float::powf(v, 1.0 - a)
                }
            }
        }
    }
}

/// Raw-mode density `D(x, y)`.
pub fn eval_density(kernel: &DispersalKernel, x: Point, y: Point) -> f64 {
    let d = kernel.dimension();
    for i in 0..d {
        assert!(x[i].is_finite() && y[i].is_finite(), "eval_density: non-finite input");
    }
    kernel.density_at_r(float::dist(x, y, d))
}

/// Density in the requested normalization mode: the raw closed form, or the
/// raw value divided by the domain-truncation mass around `x`.
pub fn eval_density_mode(
    kernel: &DispersalKernel,
    mode: Normalization,
    domain: &Domain,
    x: Point,
    y: Point,
) -> f64 {
    match mode {
        Normalization::Raw => eval_density(kernel, x, y),
        Normalization::Renormalize => {
            eval_density(kernel, x, y) / domain_truncation_mass(kernel, x, domain)
        }
    }
}

/// Mass of the raw kernel inside the box around source `x`:
/// `int_X D(x,y) dy`. Closed form in d=1; polar-panel quadrature in d=2
/// (the radial integrand is smooth, so the r=0 derivative kink of the
/// exponential kernel costs nothing).
pub fn domain_truncation_mass(kernel: &DispersalKernel, x: Point, domain: &Domain) -> f64 {
    let (lower, upper) = match domain.kind {
        DomainKind::AllSpace => return 1.0,
        DomainKind::Box { lower, upper } => (lower, upper),
    };
    match kernel.dimension() {
        1 => one_sided_mass(kernel, x[0] - lower[0]) + one_sided_mass(kernel, upper[0] - x[0]),
        2 => polar_box_mass(kernel, x, lower, upper),
        d => panic!("unsupported kernel dimension {d}"),
    }
}

/// d=1 one-sided mass `int_0^t D(s) ds`, closed form; clamps t < 0 to 0.
fn one_sided_mass(kernel: &DispersalKernel, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    match *kernel {
        DispersalKernel::Exponential { beta, .. } => 0.5 * (1.0 - float::exp(-t / beta)),
        DispersalKernel::Gaussian { beta, .. } => 0.5 * libm::erf(t / beta),
        DispersalKernel::PowerLaw { beta, a, .. } => {
            0.5 * (1.0 - float::powf(1.0 + t / beta, 1.0 - a))
        }
    }
}

/// d=2 box mass via polar panels: the angular range is split at the corner
/// directions, and `int_0^(R(theta)) D(r) r dr` is integrated by Simpson on
/// each panel (R is smooth within a panel).
fn polar_box_mass(kernel: &DispersalKernel, x: Point, lower: Point, upper: Point) -> f64 {
    const N_R: usize = 257; // odd
    const N_TH: usize = 65; // odd, per panel

    debug_assert!(
        x[0] >= lower[0] && x[0] <= upper[0] && x[1] >= lower[1] && x[1] <= upper[1],
        "truncation mass needs the source inside the box"
    );

    // boundary distance along direction theta
    let ray = |cos_t: f64, sin_t: f64| -> f64 {
        let tx = if cos_t > 0.0 {
            (upper[0] - x[0]) / cos_t
        } else if cos_t < 0.0 {
            (lower[0] - x[0]) / cos_t
        } else {
            f64::INFINITY
        };
        let ty = if sin_t > 0.0 {
            (upper[1] - x[1]) / sin_t
        } else if sin_t < 0.0 {
            (lower[1] - x[1]) / sin_t
        } else {
            f64::INFINITY
        };
        tx.min(ty)
    };

    let radial = |r_max: f64| -> f64 {
        // Simpson of r * D(r) over [0, r_max]
        let h = r_max / (N_R - 1) as f64;
        let mut s = 0.0;
        for i in 0..N_R {
            let r = i as f64 * h;
            let w = if i == 0 || i == N_R - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * r * kernel.density_at_r(r);
        }
        s * h / 3.0
    };

    // corner angles, sorted, defining 4 smooth panels around the circle
    let mut ang = [
        float::atan2(lower[1] - x[1], lower[0] - x[0]),
        float::atan2(lower[1] - x[1], upper[0] - x[0]),
        float::atan2(upper[1] - x[1], lower[0] - x[0]),
        float::atan2(upper[1] - x[1], upper[0] - x[0]),
    ];
    ang.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut total = 0.0;
    for p in 0..4 {
        let t0 = ang[p];
        let t1 = if p == 3 { ang[0] + 2.0 * PI } else { ang[p + 1] };
        if t1 - t0 < 1e-14 {
            continue;
        }
        let h = (t1 - t0) / (N_TH - 1) as f64;
        let mut s = 0.0;
        for i in 0..N_TH {
            let th = t0 + i as f64 * h;
            let w = if i == 0 || i == N_TH - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * radial(ray(float::cos(th), float::sin(th)));
        }
        total += s * h / 3.0;
    }
    total
}

/// Sample radius from the free-space radial marginal.
fn sample_radius(kernel: &DispersalKernel, rng: &mut RngStream) -> f64 {
    match *kernel {
        DispersalKernel::Exponential { beta, dimension } => {
            let e1: f64 = Exp1.sample(rng);
            if dimension == 2 {
                let e2: f64 = Exp1.sample(rng);
                beta * (e1 + e2) // Gamma(2, beta)
            } else {
                beta * e1
            }
        }
        DispersalKernel::Gaussian { beta, dimension } => {
            if dimension == 2 {
                let e1: f64 = Exp1.sample(rng);
                beta * float::sqrt(e1) // density ~ r exp(-r^2/beta^2)
            } else {
                let z: f64 = StandardNormal.sample(rng);
                float::abs(beta * core::f64::consts::FRAC_1_SQRT_2 * z)
            }
        }
        DispersalKernel::PowerLaw { beta, a, dimension } => {
            let u: f64 = rng.random();
            if dimension == 2 {
                beta * (invert_power_radial_cdf(a, u) - 1.0)
            } else {
                // CDF 1 - (1 + r/beta)^(1-a)
                beta * (float::powf(1.0 - u, 1.0 / (1.0 - a)) - 1.0)
            }
        }
    }
}

/// Solves `1 - v^(1-a) ((a-1) v - (a-2)) = u` for `v >= 1` by Newton with a
/// bisection safeguard; the left side is the d=2 radial CDF in `v = 1 + r/beta`.
fn invert_power_radial_cdf(a: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    let cdf = |v: f64| 1.0 - float::powf(v, 1.0 - a) * ((a - 1.0) * v - (a - 2.0));
    let pdf_v = |v: f64| (a - 1.0) * (a - 2.0) * (v - 1.0) * float::powf(v, -a);

    // bracket [1, hi]
    let mut hi = 2.0;
    while cdf(hi) < u {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut lo = 1.0;
    let mut v = 1.0 + float::sqrt(2.0 * u / ((a - 1.0) * (a - 2.0))); // small-u expansion
    v = v.clamp(lo, hi);
    for _ in 0..80 {
        let f = cdf(v) - u;
        if f > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        if float::abs(f) < 1e-15 {
            break;
        }
        let df = pdf_v(v);
        let step = if df > 0.0 { v - f / df } else { f64::NAN };
        v = if step.is_finite() && step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    v
}

/// Deposit location for a group released from `x`: density proportional to
/// `D(x, .)` restricted to the domain (rejection against the box; the
/// normalization mode does not change this law, only density bookkeeping).
pub fn sample_displacement(
    kernel: &DispersalKernel,
    x: Point,
    domain: &Domain,
    _mode: Normalization,
    rng: &mut RngStream,
) -> Result<Point, KernelError> {
    const CAP: u32 = 100_000;
    let d = kernel.dimension();
    for _ in 0..CAP {
        let r = sample_radius(kernel, rng);
        let mut y = x;
        if d == 2 {
            let theta: f64 = rng.random::<f64>() * 2.0 * PI;
            y[0] += r * float::cos(theta);
            y[1] += r * float::sin(theta);
        } else {
            let s: f64 = rng.random();
            y[0] += if s < 0.5 { -r } else { r };
        }
        if domain.contains(y) {
            return Ok(y);
        }
    }
    Err(KernelError::RejectionCap { cap: CAP })
}

/// Scale `beta` such that the analytic mean displacement equals `m`.
pub fn calibrate_beta(family: KernelFamily, m: f64, dimension: usize) -> Result<f64, KernelError> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(KernelError::BadParameter(format!(
            "target mean displacement must be positive and finite, got {m}"
        )));
    }
    match (family, dimension) {
        (KernelFamily::Exponential, 2) => Ok(m / 2.0),
        (KernelFamily::Exponential, 1) => Ok(m),
        (KernelFamily::Gaussian, 2) => Ok(2.0 * m / float::sqrt(PI)),
        (KernelFamily::Gaussian, 1) => Ok(m * float::sqrt(PI)),
        (KernelFamily::PowerLaw { a }, 2) => {
            if a <= 3.0 {
                Err(KernelError::InfiniteMean { a })
            } else {
                Ok(m * (a - 3.0) / 2.0)
            }
        }
        (KernelFamily::PowerLaw { a }, 1) => {
            if a <= 2.0 {
                Err(KernelError::InfiniteMean { a })
            } else {
                Ok(m * (a - 2.0))
            }
        }
        (_, d) => Err(KernelError::BadParameter(format!("dimension must be 1 or 2, got {d}"))),
    }
}

/// Group size `kappa ~ q`; 0 is allowed and yields an empty group.
/// Negative binomial samples as a gamma-mixed Poisson with shape
/// `s = mu1^2/(mu2-mu1)` and scale `(mu2-mu1)/mu1`.
pub fn sample_count(counting: &CountingDistribution, rng: &mut RngStream) -> u64 {
    match *counting {
        CountingDistribution::Fixed { n } => n,
        CountingDistribution::Poisson { mu1 } => {
            let p = Poisson::new(mu1).expect("counting distribution validated");
            p.sample(rng) as u64
        }
        CountingDistribution::NegativeBinomial { mu1, mu2 } => {
            let theta = (mu2 - mu1) / mu1;
            let s = mu1 / theta;
            let gamma = Gamma::new(s, theta).expect("counting distribution validated");
            let lam: f64 = gamma.sample(rng);
            if lam < 1e-300 {
                return 0; // Poisson(0+) is 0 a.s.; avoids the positivity check
            }
            let p = Poisson::new(lam).expect("gamma mixture produced invalid rate");
            p.sample(rng) as u64
        }
    }
}

/// Maturation rate `lambda(x, y)`.
pub fn eval_rate(rate: &MaturationRate, x: Point, y: Point, dimension: usize) -> f64 {
    rate.eval(x, y, dimension)
}
