//! IMEX time stepping for the coupled system.
//!
//! Each step treats diffusion implicitly (Crank-Nicolson per origin row)
//! and the reaction/source pair explicitly, both evaluated on the pre-step
//! fields; the plant gain likewise integrates the pre-step seed field. With
//! Neumann walls and a renormalized deposit kernel the discrete masses obey
//!
//! ```text
//! <1, f + g>(t + dt) - <1, f + g>(t) = dt * mu1 * <1, f>(t)
//! ```
//!
//! exactly (trapezoid weights annihilate the difference operators), so mass
//! bookkeeping errors cannot hide behind truncation error.

use super::tridiag;
use super::{BoundaryCondition, PdeState};
use alloc::vec;
use alloc::vec::Vec;

/// One step of the base system. Requires `dt * sup lambda < 1`.
pub fn step_direct(state: &mut PdeState, dt: f64) {
    step_imex(state, dt, 0.0);
}

/// One step of the viscous regularization: the position sweep of
/// `step_direct`, then an implicit `epsilon * Lap_x` sweep along the origin
/// axis with Neumann walls (the regularized problem is flux-free on the
/// whole boundary). `state.epsilon == 0` skips the origin sweep entirely,
/// so the step is bit-identical to `step_direct`.
pub fn step_viscous(state: &mut PdeState, dt: f64) {
    step_imex(state, dt, state.epsilon);
}

pub fn run_direct(state: &mut PdeState, dt: f64, n_steps: usize) {
    for _ in 0..n_steps {
        step_direct(state, dt);
    }
}

pub fn run_viscous(state: &mut PdeState, dt: f64, n_steps: usize) {
    for _ in 0..n_steps {
        step_viscous(state, dt);
    }
}

/// Fields stored at a shared sequence of times, the input to the weak-form
/// residual check.
#[derive(Debug, Clone)]
pub struct SolutionTrajectory {
    pub times: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
}

/// Advances `n_steps` with `step_viscous` (so `epsilon == 0` reproduces the
/// base system bit for bit) and records the fields every `every` steps.
/// `n_steps` must be a multiple of `every`: the residual quadrature assumes
/// uniformly spaced records.
pub fn run_recording(
    state: &mut PdeState,
    dt: f64,
    n_steps: usize,
    every: usize,
) -> SolutionTrajectory {
    assert!(every > 0 && n_steps % every == 0);
    let mut traj = SolutionTrajectory {
        times: vec![state.t],
        f: vec![state.f.clone()],
        g: vec![state.g.clone()],
    };
    for step in 1..=n_steps {
        step_viscous(state, dt);
        if step % every == 0 {
            traj.times.push(state.t);
            traj.f.push(state.f.clone());
            traj.g.push(state.g.clone());
        }
    }
    traj
}

fn step_imex(state: &mut PdeState, dt: f64, eps: f64) {
    assert!(dt > 0.0 && dt.is_finite());
    let lam_dt = dt * state.lambda_max();
    assert!(
        lam_dt < 1.0,
        "explicit reaction needs dt * sup lambda < 1, got {lam_dt}"
    );
    let (nx, ny) = (state.grid.nx, state.grid.ny);
    let wx = state.grid.weights_x();

    // Plant gain from the pre-step seed field: position j collects the
    // maturation flux over all origins.
    let mut f_new = state.f.clone();
    for (j, fj) in f_new.iter_mut().enumerate() {
        let mut gain = 0.0;
        for i in 0..nx {
            let ij = i * ny + j;
            gain += wx[i] * state.lambda[ij] * state.g[ij];
        }
        *fj += dt * gain;
    }

    // Position sweep: Crank-Nicolson in y per origin row, reaction and
    // deposit source explicit at the pre-step values.
    let hy = state.grid.hy();
    let alpha = state.nu * dt / (2.0 * hy * hy);
    let (sub, diag, sup) = sweep_matrix(ny, alpha, state.grid.bc);
    let mut rhs = vec![0.0; ny];
    let mut scratch = vec![0.0; ny];
    let dirichlet = state.grid.bc == BoundaryCondition::Dirichlet;
    for i in 0..nx {
        let row = &state.g[i * ny..(i + 1) * ny];
        let f_i = state.f[i];
        for j in 0..ny {
            let explicit =
                dt * (state.mu1 * state.d_kernel[i * ny + j] * f_i - state.lambda[i * ny + j] * row[j]);
            let lap = if j == 0 {
                2.0 * row[1] - 2.0 * row[0]
            } else if j == ny - 1 {
                2.0 * row[ny - 2] - 2.0 * row[ny - 1]
            } else {
                row[j - 1] - 2.0 * row[j] + row[j + 1]
            };
            rhs[j] = row[j] + alpha * lap + explicit;
        }
        if dirichlet {
            rhs[0] = 0.0;
            rhs[ny - 1] = 0.0;
        }
        tridiag::solve_in_place(&sub, &diag, &sup, &mut rhs, &mut scratch);
        state.g[i * ny..(i + 1) * ny].copy_from_slice(&rhs);
    }

    // Origin sweep for the viscous variant: backward Euler, Neumann walls.
    if eps > 0.0 {
        let hx = state.grid.hx();
        let beta = eps * dt / (hx * hx);
        let (sub, diag, sup) = euler_matrix(nx, beta);
        let mut col = vec![0.0; nx];
        let mut scratch = vec![0.0; nx];
        for j in 0..ny {
            for i in 0..nx {
                col[i] = state.g[i * ny + j];
            }
            tridiag::solve_in_place(&sub, &diag, &sup, &mut col, &mut scratch);
            for i in 0..nx {
                state.g[i * ny + j] = col[i];
            }
        }
    }

    state.f = f_new;
    state.t += dt;
}

/// `I - alpha * L_h` rows for the Crank-Nicolson sweep. Neumann uses the
/// mirror-ghost stencil `(2u[1] - 2u[0]) / h^2` at the walls; Dirichlet pins
/// the wall rows to the identity.
pub(super) fn sweep_matrix(
    n: usize,
    alpha: f64,
    bc: BoundaryCondition,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut sub = vec![-alpha; n];
    let mut diag = vec![1.0 + 2.0 * alpha; n];
    let mut sup = vec![-alpha; n];
    sub[0] = 0.0;
    sup[n - 1] = 0.0;
    match bc {
        BoundaryCondition::Neumann => {
            sup[0] = -2.0 * alpha;
            sub[n - 1] = -2.0 * alpha;
        }
        BoundaryCondition::Dirichlet => {
            diag[0] = 1.0;
            diag[n - 1] = 1.0;
            sup[0] = 0.0;
            sub[n - 1] = 0.0;
        }
    }
    (sub, diag, sup)
}

/// `I - beta * L_h` rows for the backward-Euler origin sweep, Neumann walls.
fn euler_matrix(n: usize, beta: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut sub = vec![-beta; n];
    let diag = vec![1.0 + 2.0 * beta; n];
    let mut sup = vec![-beta; n];
    sub[0] = 0.0;
    sup[n - 1] = 0.0;
    sup[0] = -2.0 * beta;
    sub[n - 1] = -2.0 * beta;
    (sub, diag, sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::float;
    use crate::pde::Grid;
    use core::f64::consts::PI;

    fn cosine_bump(y: f64, half_width: f64) -> f64 {
        if y.abs() >= half_width {
            0.0
        } else {
            let c = float::cos(PI * y / (2.0 * half_width));
            c * c / half_width
        }
    }

    /// Coupled reference problem on [-10, 10]: distance-proportional rate,
    /// renormalized exponential deposit kernel, cosine-bump plants.
    fn reference(n: usize, bc: BoundaryCondition, epsilon: f64) -> PdeState {
        let grid = Grid::new(n, n, -10.0, 10.0, bc);
        let f0 = (0..n).map(|j| cosine_bump(grid.y(j), 5.0)).collect();
        PdeState::new(
            grid,
            f0,
            |x, y| 0.05 * float::abs(y - x),
            |x, y| float::exp(-float::abs(y - x) / 2.5) / 5.0,
            true,
            2.5,
            epsilon,
            1.0,
        )
    }

    fn fill_mode(state: &mut PdeState, k: usize, dirichlet: bool) {
        let ny = state.grid.ny;
        for i in 0..state.grid.nx {
            for j in 0..ny {
                let phase = k as f64 * PI * state.grid.y(j);
                state.g[i * ny + j] = if dirichlet {
                    float::sin(phase)
                } else {
                    float::cos(phase)
                };
            }
        }
    }

    #[test]
    fn neumann_heat_mode_decays_at_the_exact_rate() {
        let grid = Grid::new(65, 65, 0.0, 1.0, BoundaryCondition::Neumann);
        let mut state = PdeState::new(grid, vec![0.0; 65], |_, _| 0.0, |_, _| 0.0, false, 1.0, 0.0, 0.0);
        fill_mode(&mut state, 1, false);
        run_direct(&mut state, 1e-3, 100);
        let decay = float::exp(-PI * PI * 0.1);
        for j in 0..65 {
            let want = decay * float::cos(PI * grid.y(j));
            let got = state.g[32 * 65 + j];
            assert!((got - want).abs() < 1e-3 * decay, "node {j}: {got} vs {want}");
        }
        assert!(state.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dirichlet_mode_decays_and_walls_stay_pinned() {
        let grid = Grid::new(65, 65, 0.0, 1.0, BoundaryCondition::Dirichlet);
        let mut state = PdeState::new(grid, vec![0.0; 65], |_, _| 0.0, |_, _| 0.0, false, 1.0, 0.0, 0.0);
        fill_mode(&mut state, 1, true);
        run_direct(&mut state, 1e-3, 100);
        let decay = float::exp(-PI * PI * 0.1);
        for i in 0..65 {
            assert_eq!(state.g[i * 65], 0.0);
            assert_eq!(state.g[i * 65 + 64], 0.0);
            let got = state.g[i * 65 + 32];
            let want = decay * float::sin(PI * 0.5);
            assert!((got - want).abs() < 1e-3 * decay);
        }
    }

    #[test]
    fn mass_balance_is_exact_per_step() {
        for eps in [0.0, 0.1] {
            let mut state = reference(32, BoundaryCondition::Neumann, eps);
            for _ in 0..25 {
                let before = state.mass_f() + state.mass_g();
                let gain = 0.02 * state.mu1 * state.mass_f();
                step_viscous(&mut state, 0.02);
                let after = state.mass_f() + state.mass_g();
                assert!(
                    (after - before - gain).abs() < 1e-12,
                    "eps {eps}: drift {}",
                    after - before - gain
                );
            }
        }
    }

    #[test]
    fn zero_viscosity_matches_the_base_step_bit_for_bit() {
        let mut a = reference(24, BoundaryCondition::Neumann, 0.0);
        let mut b = a.clone();
        for _ in 0..10 {
            step_direct(&mut a, 0.05);
            step_viscous(&mut b, 0.05);
        }
        assert_eq!(a.f, b.f);
        assert_eq!(a.g, b.g);
    }

    #[test]
    fn zero_rate_leaves_plants_untouched() {
        let grid = Grid::new(33, 33, -10.0, 10.0, BoundaryCondition::Neumann);
        let f0: Vec<f64> = (0..33).map(|j| cosine_bump(grid.y(j), 5.0)).collect();
        let mut state = PdeState::new(
            grid,
            f0.clone(),
            |_, _| 0.0,
            |x, y| float::exp(-float::abs(y - x) / 2.5) / 5.0,
            true,
            2.5,
            0.0,
            1.0,
        );
        run_direct(&mut state, 0.05, 20);
        assert_eq!(state.f, f0);
        assert!(state.mass_g() > 0.5);
    }

    #[test]
    fn fields_stay_nonnegative_and_plants_grow_under_the_cfl_bound() {
        // nu dt / h^2 + dt sup lambda = 0.25 + 0.02 <= 1.
        let mut state = reference(17, BoundaryCondition::Neumann, 0.0);
        let h = state.grid.hy();
        let dt = 0.25 * h * h / state.nu;
        assert!(state.nu * dt / (h * h) + dt * state.lambda_max() <= 1.0);
        let mut prev_f = state.f.clone();
        for _ in 0..40 {
            step_direct(&mut state, dt);
            assert!(state.min_value() >= 0.0);
            for (new, old) in state.f.iter().zip(&prev_f) {
                assert!(new >= old);
            }
            prev_f = state.f.clone();
        }
    }

    #[test]
    #[should_panic(expected = "dt * sup lambda")]
    fn oversized_steps_are_rejected() {
        let mut state = reference(17, BoundaryCondition::Neumann, 0.0);
        let dt = 1.01 / state.lambda_max();
        step_direct(&mut state, dt);
    }

    #[test]
    fn recording_hits_the_requested_cadence() {
        let mut state = reference(17, BoundaryCondition::Neumann, 0.0);
        let traj = run_recording(&mut state, 0.05, 20, 5);
        assert_eq!(traj.times.len(), 5);
        assert!((traj.times[4] - 1.0).abs() < 1e-12);
        assert_eq!(traj.f.len(), 5);
        assert_eq!(traj.g.len(), 5);
    }
}
