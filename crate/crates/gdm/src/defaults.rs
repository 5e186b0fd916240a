//! Study parameters and pass thresholds, in one place so the tolerances the
//! reports cite are versioned and auditable. Each threshold names the report
//! criterion it gates.

/// `moment-mc-4se`: Monte Carlo mean within this many standard errors of
/// the ODE oracle at every checkpoint.
pub const MOMENT_SE_FACTOR: f64 = 4.0;
pub const MOMENT_REPLICAS: usize = 10_000;
pub const MOMENT_T_CHECKS: [f64; 3] = [1.0, 2.0, 3.0];

pub const SCALING_K_LIST: [u64; 3] = [100, 400, 1600];
pub const SCALING_REPLICAS: usize = 100;
pub const SCALING_T: f64 = 1.0;
pub const SCALING_CELLS: usize = 16;
/// `scaling-l1-threshold`: mean L1 distance to the limit density at the
/// largest population scale. At K = 1600 the distance is sampling-noise
/// dominated (family clustering inflates per-cell variance; measured near
/// 0.15 with the default replica count, standard error 0.004). 0.25 sits
/// between the K = 400 and K = 1600 levels, so a run whose histograms stop
/// improving still fails.
pub const SCALING_L1_MAX: f64 = 0.25;
/// `scaling-var-k`: K * Var of the scaled plant count must agree across K
/// within this factor.
pub const SCALING_VAR_FACTOR: f64 = 2.0;

pub const EPSILON_LIST: [f64; 3] = [1e-1, 1e-2, 1e-3];
/// `viscous-g1-lower-bound`: allowed nodewise undershoot of the regularized
/// solution below its frozen-plant first iterate.
pub const VISCOUS_LOWER_TOL: f64 = 1e-8;

/// `picard-direct-linf` / `picard-direct-l2`: agreement between the fixed
/// point and the direct recursion at the reference resolution.
pub const PICARD_LINF_MAX: f64 = 1e-4;
pub const PICARD_L2_MAX: f64 = 1e-4;
/// `picard-monotone`: allowed nodewise decrease between successive iterates.
pub const PICARD_MONOTONE_TOL: f64 = 1e-12;
