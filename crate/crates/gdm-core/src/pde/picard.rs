//! Picard iteration on the integral form of the coupled system.
//!
//! Starting from the constant-in-time seed pair `(f_0(t) = f(0), g_0 = 0)`,
//! each iterate solves the linear seed equation over the whole horizon with
//! the previous plant trajectory frozen as source, then rebuilds the plant
//! trajectory from the maturation flux of the fresh seed solution. The two
//! half-updates discretize exactly like the base stepper (explicit source at
//! the step start, left-rectangle flux integral), so the fixed point of the
//! iteration is the base recursion itself. Iterates grow pointwise: a larger
//! plant trajectory feeds a larger deposit source and vice versa.

use super::stepper::step_viscous;
use super::PdeState;
use crate::float;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    /// Plant density at the final time.
    pub f: Vec<f64>,
    /// Seed density at the final time.
    pub g: Vec<f64>,
    /// Iterates computed before the Cauchy test passed.
    pub iterations: usize,
    /// Per iterate: `sup_t` of the weighted-L2 distance between consecutive
    /// plant trajectories (the first entry compares against the seed pair).
    pub diffs: Vec<f64>,
    /// Per iterate: smallest pointwise increment over both fields and all
    /// record times. Nonnegative entries certify a monotone iteration.
    pub min_increments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PicardError {
    NotConverged { n_max: usize, last_diff: f64 },
}

impl fmt::Display for PicardError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PicardError::NotConverged { n_max, last_diff } => write!(
                f,
                "picard iteration still moving after {n_max} iterates (last sup-distance {last_diff:e})"
            ),
        }
    }
}

/// Iterates until two consecutive computed trajectories agree to `tol` in
/// `sup_t` weighted L2. The seed trajectory is an initialization, not an
/// iterate of the map, so the Cauchy test starts at the second iterate;
/// `lambda == 0` therefore reports exactly two iterations. Exceeding
/// `n_max` is an error, never a silent truncation.
pub fn picard_solve(
    initial: &PdeState,
    dt: f64,
    n_steps: usize,
    n_max: usize,
    tol: f64,
) -> Result<PicardOutcome, PicardError> {
    assert!(n_steps >= 1 && n_max >= 2 && tol > 0.0);
    assert!(
        initial.g.iter().all(|&v| v == 0.0),
        "the integral form starts from an empty seed field"
    );
    let (nx, ny) = (initial.grid.nx, initial.grid.ny);
    let wx = initial.grid.weights_x();
    let wy = initial.grid.weights_y();

    let mut f_prev: Vec<Vec<f64>> = vec![initial.f.clone(); n_steps + 1];
    let mut g_prev: Vec<Vec<f64>> = vec![initial.g.clone(); n_steps + 1];
    let mut diffs = Vec::new();
    let mut min_increments = Vec::new();

    for n in 1..=n_max {
        let mut work = initial.clone();
        let mut f_cur = initial.f.clone();
        let mut f_traj = vec![f_cur.clone()];
        let mut g_traj = vec![work.g.clone()];
        for f_frozen in f_prev.iter().take(n_steps) {
            let mut f_next = f_cur.clone();
            for (j, fj) in f_next.iter_mut().enumerate() {
                let mut gain = 0.0;
                for i in 0..nx {
                    let ij = i * ny + j;
                    gain += wx[i] * work.lambda[ij] * work.g[ij];
                }
                *fj += dt * gain;
            }
            work.f = f_frozen.clone();
            step_viscous(&mut work, dt);
            f_cur = f_next;
            f_traj.push(f_cur.clone());
            g_traj.push(work.g.clone());
        }

        let mut sup = 0.0f64;
        for (new, old) in f_traj.iter().zip(&f_prev) {
            let mut s = 0.0;
            for j in 0..ny {
                let d = new[j] - old[j];
                s += wy[j] * d * d;
            }
            sup = sup.max(float::sqrt(s));
        }
        let mut min_inc = f64::INFINITY;
        for (new, old) in f_traj.iter().zip(&f_prev) {
            for (a, b) in new.iter().zip(old) {
                min_inc = min_inc.min(a - b);
            }
        }
        for (new, old) in g_traj.iter().zip(&g_prev) {
            for (a, b) in new.iter().zip(old) {
                min_inc = min_inc.min(a - b);
            }
        }
        diffs.push(sup);
        min_increments.push(min_inc);

        f_prev = f_traj;
        g_prev = g_traj;
        if n >= 2 && sup < tol {
            return Ok(PicardOutcome {
                f: f_prev[n_steps].clone(),
                g: g_prev[n_steps].clone(),
                iterations: n,
                diffs,
                min_increments,
            });
        }
    }
    Err(PicardError::NotConverged {
        n_max,
        last_diff: *diffs.last().unwrap(),
    })
}
