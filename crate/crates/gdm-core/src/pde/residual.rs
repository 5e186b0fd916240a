//! Weak-form consistency check on recorded trajectories.
//!
//! For a stored solution the identities
//!
//! ```text
//! <f(T), phi> - <f(t0), phi>  = int <lambda g, phi(y)>
//! <g(T), Phi> - <g(t0), Phi>  = int { nu <g, psi chi''> - <lambda g, Phi>
//!                                     + mu1 <D f, Phi> }
//! ```
//!
//! are evaluated with trapezoid quadrature in space and time, where
//! `Phi(x,y) = psi(x) chi(y)`. The position factor `chi` must satisfy the
//! wall condition so the diffusion term can be moved onto the test function:
//! cosine modes for Neumann, sine modes for Dirichlet; a constant factor
//! under Dirichlet walls is rejected. The plant equation carries no spatial
//! operator, so its test functions are unconstrained polynomials. Residuals
//! shrink first order in dt and second order in the mesh width; the constant
//! pair `phi = Phi = 1` turns the two identities into the mass balance.

use super::stepper::SolutionTrajectory;
use super::{BoundaryCondition, PdeState};
use crate::float;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Test function for one weak identity.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// Plant equation: polynomial in the normalized coordinate
    /// `(y - lo) / (hi - lo)`, lowest degree first.
    PlantPoly { coeffs: Vec<f64> },
    /// Seed equation: `psi((x - lo)/(hi - lo))` polynomial times the
    /// position mode `cos(k pi u)` (Neumann) or `sin(k pi u)` (Dirichlet).
    SeedSeparable { psi: Vec<f64>, mode: usize },
}

/// Residual magnitude of each identity, one entry per test function.
pub fn weak_residual(
    coeffs: &PdeState,
    traj: &SolutionTrajectory,
    tests: &[TestFunction],
) -> Result<Vec<f64>, String> {
    let n_rec = traj.times.len();
    if n_rec < 2 {
        return Err(String::from("need at least two records"));
    }
    if traj.f.len() != n_rec || traj.g.len() != n_rec {
        return Err(String::from("record lengths disagree"));
    }
    let dt_rec = traj.times[1] - traj.times[0];
    for k in 1..n_rec {
        if ((traj.times[k] - traj.times[k - 1]) - dt_rec).abs() > 1e-12 * (1.0 + dt_rec) {
            return Err(String::from("records must be uniformly spaced in time"));
        }
    }

    let grid = &coeffs.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let wx = grid.weights_x();
    let wy = grid.weights_y();
    let span = grid.hi - grid.lo;

    let mut residuals = Vec::with_capacity(tests.len());
    for test in tests {
        let residual = match test {
            TestFunction::PlantPoly { coeffs: poly } => {
                let phi: Vec<f64> = (0..ny)
                    .map(|j| poly_eval(poly, (grid.y(j) - grid.lo) / span))
                    .collect();
                let pair = |f: &Vec<f64>| -> f64 {
                    f.iter().zip(&wy).zip(&phi).map(|((f, w), p)| w * f * p).sum()
                };
                let flux = |g: &Vec<f64>| -> f64 {
                    let mut total = 0.0;
                    for i in 0..nx {
                        for j in 0..ny {
                            let ij = i * ny + j;
                            total += wx[i] * wy[j] * coeffs.lambda[ij] * g[ij] * phi[j];
                        }
                    }
                    total
                };
                let lhs = pair(&traj.f[n_rec - 1]) - pair(&traj.f[0]);
                let rhs = time_trapezoid(dt_rec, n_rec, |k| flux(&traj.g[k]));
                float::abs(lhs - rhs)
            }
            TestFunction::SeedSeparable { psi, mode } => {
                if grid.bc == BoundaryCondition::Dirichlet && *mode == 0 {
                    return Err(String::from(
                        "constant position factor violates the absorbing wall condition",
                    ));
                }
                let k = *mode as f64;
                let chi: Vec<f64> = (0..ny)
                    .map(|j| {
                        let u = (grid.y(j) - grid.lo) / span;
                        match grid.bc {
                            BoundaryCondition::Neumann => float::cos(k * PI * u),
                            BoundaryCondition::Dirichlet => float::sin(k * PI * u),
                        }
                    })
                    .collect();
                let curvature = -(k * PI / span) * (k * PI / span);
                let psi_x: Vec<f64> = (0..nx)
                    .map(|i| poly_eval(psi, (grid.x(i) - grid.lo) / span))
                    .collect();
                let pair = |g: &Vec<f64>| -> f64 {
                    let mut total = 0.0;
                    for i in 0..nx {
                        for j in 0..ny {
                            total += wx[i] * wy[j] * psi_x[i] * chi[j] * g[i * ny + j];
                        }
                    }
                    total
                };
                let integrand = |k_rec: usize| -> f64 {
                    let g = &traj.g[k_rec];
                    let f = &traj.f[k_rec];
                    let mut total = 0.0;
                    for i in 0..nx {
                        for j in 0..ny {
                            let ij = i * ny + j;
                            let phi_ij = psi_x[i] * chi[j];
                            total += wx[i]
                                * wy[j]
                                * (coeffs.nu * curvature * phi_ij * g[ij]
                                    - coeffs.lambda[ij] * phi_ij * g[ij]
                                    + coeffs.mu1 * coeffs.d_kernel[ij] * f[i] * phi_ij);
                        }
                    }
                    total
                };
                let lhs = pair(&traj.g[n_rec - 1]) - pair(&traj.g[0]);
                let rhs = time_trapezoid(dt_rec, n_rec, integrand);
                float::abs(lhs - rhs)
            }
        };
        residuals.push(residual);
    }
    Ok(residuals)
}

fn poly_eval(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

fn time_trapezoid(dt: f64, n: usize, mut value: impl FnMut(usize) -> f64) -> f64 {
    let mut total = 0.5 * (value(0) + value(n - 1));
    for k in 1..n - 1 {
        total += value(k);
    }
    total * dt
}
