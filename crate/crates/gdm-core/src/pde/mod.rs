//! Solvers for the large-population density system: plant density `f(t,x)`
//! coupled to the seed density `g(t,x,y)` over origin/position pairs,
//!
//! ```text
//! df/dt(t,x)   = int lambda(z,x) g(t,z,x) dz
//! dg/dt(t,x,y) = nu Lap_y g - lambda(x,y) g + mu1 D(x,y) f(t,x)
//! ```
//!
//! with `nu = sigma^2/2`, Neumann or Dirichlet walls in `y`, `g(0) = 0`,
//! plus three companions: an `epsilon Lap_x` viscous regularization of the
//! `g` equation, a Picard iteration on the equivalent integral form, and the
//! reduced position-only system for rates `lambda(y)`.
//!
//! The origin axis is one-dimensional (seed positions then live on a 2D
//! origin/position lattice); two-dimensional positions are served by the
//! reduced model. Discretization: second-order central differences, IMEX
//! stepping (Crank-Nicolson diffusion per row, reaction and source explicit
//! with full-step weight), trapezoid quadrature with a fixed summation order
//! everywhere. First order in time, second order in space.

mod grid;
mod norms;
mod picard;
mod reduced;
mod residual;
mod stepper;
mod tridiag;

pub use grid::{BoundaryCondition, Grid};
pub use norms::{monitor_norms, NormEntry, NormMonitor};
pub use picard::{picard_solve, PicardError, PicardOutcome};
pub use reduced::{reduced_step, run_reduced, ReducedState};
pub use residual::{weak_residual, TestFunction};
pub use stepper::{
    run_direct, run_recording, run_viscous, step_direct, step_viscous, SolutionTrajectory,
};

use alloc::vec;
use alloc::vec::Vec;

/// Discrete state of the coupled system on an `nx * ny` lattice
/// (`g[i * ny + j] = g(x_i, y_j)`, `f[j] = f(y_j)`; the plant density lives
/// on the position grid, which equals the origin grid).
#[derive(Debug, Clone, PartialEq)]
pub struct PdeState {
    pub grid: Grid,
    pub t: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// Diffusivity on the position axis, `sigma^2/2`.
    pub nu: f64,
    /// Viscosity on the origin axis (used by the viscous stepper).
    pub epsilon: f64,
    /// `lambda(x_i, y_j)` tabulated.
    pub lambda: Vec<f64>,
    /// `D(x_i, y_j)` tabulated, row-renormalized when requested so each
    /// origin's deposit density has discrete mass one.
    pub d_kernel: Vec<f64>,
    pub mu1: f64,
}

impl PdeState {
    /// Builds the `t = 0` state (`g = 0`) with tabulated coefficients.
    /// `renormalize` divides each origin row of `D` by its trapezoid mass,
    /// which is what makes the discrete mass balance exact.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: Grid,
        f0: Vec<f64>,
        lambda: impl Fn(f64, f64) -> f64,
        kernel: impl Fn(f64, f64) -> f64,
        renormalize: bool,
        nu: f64,
        epsilon: f64,
        mu1: f64,
    ) -> Self {
        assert_eq!(
            grid.nx, grid.ny,
            "the coupled system needs matching origin/position grids"
        );
        assert_eq!(f0.len(), grid.ny, "f lives on the position grid");
        assert!(nu >= 0.0 && epsilon >= 0.0 && mu1 >= 0.0);
        let (nx, ny) = (grid.nx, grid.ny);
        let mut lam = vec![0.0; nx * ny];
        let mut dk = vec![0.0; nx * ny];
        for i in 0..nx {
            let x = grid.x(i);
            for j in 0..ny {
                let y = grid.y(j);
                let l = lambda(x, y);
                let d = kernel(x, y);
                assert!(l >= 0.0 && l.is_finite(), "lambda({x}, {y}) = {l}");
                assert!(d >= 0.0 && d.is_finite(), "kernel({x}, {y}) = {d}");
                lam[i * ny + j] = l;
                dk[i * ny + j] = d;
            }
        }
        if renormalize {
            let wy = grid.weights_y();
            for i in 0..nx {
                let row = &mut dk[i * ny..(i + 1) * ny];
                let mass: f64 = row.iter().zip(&wy).map(|(d, w)| d * w).sum();
                if mass > 0.0 {
                    for d in row {
                        *d /= mass;
                    }
                }
            }
        }
        PdeState {
            grid,
            t: 0.0,
            f: f0,
            g: vec![0.0; nx * ny],
            nu,
            epsilon,
            lambda: lam,
            d_kernel: dk,
            mu1,
        }
    }

    /// Largest tabulated rate.
    pub fn lambda_max(&self) -> f64 {
        self.lambda.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// `<1, f>` by trapezoid.
    pub fn mass_f(&self) -> f64 {
        let w = self.grid.weights_y();
        self.f.iter().zip(&w).map(|(f, w)| f * w).sum()
    }

    /// `<1, g>` by trapezoid over both axes, summed origin-major.
    pub fn mass_g(&self) -> f64 {
        let wx = self.grid.weights_x();
        let wy = self.grid.weights_y();
        let mut total = 0.0;
        for i in 0..self.grid.nx {
            let row = &self.g[i * self.grid.ny..(i + 1) * self.grid.ny];
            let row_mass: f64 = row.iter().zip(&wy).map(|(g, w)| g * w).sum();
            total += wx[i] * row_mass;
        }
        total
    }

    /// Smallest entry across both fields (nonnegativity monitor).
    pub fn min_value(&self) -> f64 {
        let mf = self.f.iter().cloned().fold(f64::INFINITY, f64::min);
        let mg = self.g.iter().cloned().fold(f64::INFINITY, f64::min);
        mf.min(mg)
    }
}
