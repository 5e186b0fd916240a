//! Position-only reduction for maturation rates that ignore the origin.
//!
//! When `lambda = lambda(y)` the origin axis can be integrated out: the seed
//! marginal `G(t,y) = int g(t,x,y) dx` closes,
//!
//! ```text
//! dF/dt(t,x) = lambda(x) G(t,x)
//! dG/dt(t,y) = nu Lap_y G - lambda(y) G + mu1 int D(x,y) F(t,x) dx
//! ```
//!
//! and the position space may be one- or two-dimensional. The discretization
//! mirrors the full stepper sweep for sweep (Crank-Nicolson per axis line,
//! explicit reaction and source at the pre-step fields), so on a shared grid
//! the trapezoid marginal of the full solution and the reduced solution
//! agree to roundoff. With a constant rate and a renormalized kernel the
//! discrete masses follow the forward-Euler recursion of the mean ODE pair
//! `M_f' = lambda M_g`, `M_g' = mu1 M_f - lambda M_g` exactly.

use super::stepper::sweep_matrix;
use super::tridiag;
use super::BoundaryCondition;
use crate::domain::Point;
use alloc::vec;
use alloc::vec::Vec;

/// Discrete state of the reduced system on an `n^dim` position lattice
/// (row-major for `dim == 2`: node `p = a * n + b` sits at
/// `(lo + h a, lo + h b)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub dim: usize,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub bc: BoundaryCondition,
    pub t: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub nu: f64,
    pub mu1: f64,
    /// `lambda(y_p)` tabulated; position-only by construction.
    pub lambda: Vec<f64>,
    /// `D(x_q, y_p)` tabulated as `d_kernel[q * m + p]`, `m = n^dim`,
    /// row-renormalized when requested.
    pub d_kernel: Vec<f64>,
}

impl ReducedState {
    /// Builds the `t = 0` state (`g = 0`). The rate closure sees positions
    /// only, which is exactly the regime where the reduction is valid.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        n: usize,
        lo: f64,
        hi: f64,
        bc: BoundaryCondition,
        f0: Vec<f64>,
        lambda: impl Fn(Point) -> f64,
        kernel: impl Fn(Point, Point) -> f64,
        renormalize: bool,
        nu: f64,
        mu1: f64,
    ) -> Self {
        assert!(dim == 1 || dim == 2, "positions are 1D or 2D");
        assert!(n >= 3 && lo.is_finite() && hi.is_finite() && lo < hi);
        assert!(nu >= 0.0 && mu1 >= 0.0);
        let m = if dim == 2 { n * n } else { n };
        assert_eq!(f0.len(), m);
        let mut state = ReducedState {
            dim,
            n,
            lo,
            hi,
            bc,
            t: 0.0,
            f: f0,
            g: vec![0.0; m],
            nu,
            mu1,
            lambda: vec![0.0; m],
            d_kernel: vec![0.0; m * m],
        };
        for p in 0..m {
            let l = lambda(state.node(p));
            assert!(l >= 0.0 && l.is_finite());
            state.lambda[p] = l;
        }
        for q in 0..m {
            let x = state.node(q);
            for p in 0..m {
                let d = kernel(x, state.node(p));
                assert!(d >= 0.0 && d.is_finite());
                state.d_kernel[q * m + p] = d;
            }
        }
        if renormalize {
            let w = state.weights();
            for q in 0..m {
                let row = &mut state.d_kernel[q * m..(q + 1) * m];
                let mass: f64 = row.iter().zip(&w).map(|(d, w)| d * w).sum();
                if mass > 0.0 {
                    for d in row {
                        *d /= mass;
                    }
                }
            }
        }
        state
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// Coordinates of lattice node `p` (second entry 0 in 1D).
    pub fn node(&self, p: usize) -> Point {
        let h = self.h();
        if self.dim == 2 {
            [self.lo + h * (p / self.n) as f64, self.lo + h * (p % self.n) as f64]
        } else {
            [self.lo + h * p as f64, 0.0]
        }
    }

    /// Tensor trapezoid weights over the lattice.
    pub fn weights(&self) -> Vec<f64> {
        let line = super::grid::trapezoid_weights(self.n, self.h());
        if self.dim == 2 {
            let mut w = vec![0.0; self.n * self.n];
            for a in 0..self.n {
                for b in 0..self.n {
                    w[a * self.n + b] = line[a] * line[b];
                }
            }
            w
        } else {
            line
        }
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    pub fn mass_f(&self) -> f64 {
        self.weights().iter().zip(&self.f).map(|(w, v)| w * v).sum()
    }

    pub fn mass_g(&self) -> f64 {
        self.weights().iter().zip(&self.g).map(|(w, v)| w * v).sum()
    }
}

/// One IMEX step, mirroring the full stepper: explicit reaction and deposit
/// source at the pre-step fields, Crank-Nicolson diffusion per axis line
/// (the 2D splitting sweeps the second coordinate first, then the first).
pub fn reduced_step(state: &mut ReducedState, dt: f64) {
    assert!(dt > 0.0 && dt.is_finite());
    let lam_dt = dt * state.lambda_max();
    assert!(
        lam_dt < 1.0,
        "explicit reaction needs dt * sup lambda < 1, got {lam_dt}"
    );
    let n = state.n;
    let m = state.f.len();
    let w = state.weights();
    let dirichlet = state.bc == BoundaryCondition::Dirichlet;

    let mut source = vec![0.0; m];
    for q in 0..m {
        let wf = w[q] * state.f[q];
        if wf != 0.0 {
            let row = &state.d_kernel[q * m..(q + 1) * m];
            for (s, d) in source.iter_mut().zip(row) {
                *s += wf * d;
            }
        }
    }
    for s in source.iter_mut() {
        *s *= state.mu1;
    }

    let mut f_new = state.f.clone();
    for p in 0..m {
        f_new[p] += dt * state.lambda[p] * state.g[p];
    }

    let h = state.h();
    let alpha = state.nu * dt / (2.0 * h * h);
    let (sub, diag, sup) = sweep_matrix(n, alpha, state.bc);
    let mut rhs = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    // Contiguous sweep (the only one in 1D) carries the explicit terms.
    let lines = m / n;
    for line in 0..lines {
        let base = line * n;
        let seg = &state.g[base..base + n];
        for j in 0..n {
            let p = base + j;
            let lap = if j == 0 {
                2.0 * seg[1] - 2.0 * seg[0]
            } else if j == n - 1 {
                2.0 * seg[n - 2] - 2.0 * seg[n - 1]
            } else {
                seg[j - 1] - 2.0 * seg[j] + seg[j + 1]
            };
            rhs[j] = seg[j] + alpha * lap + dt * (source[p] - state.lambda[p] * seg[j]);
        }
        if dirichlet {
            rhs[0] = 0.0;
            rhs[n - 1] = 0.0;
        }
        tridiag::solve_in_place(&sub, &diag, &sup, &mut rhs, &mut scratch);
        state.g[base..base + n].copy_from_slice(&rhs);
    }

    // Strided homogeneous sweep along the first coordinate in 2D.
    if state.dim == 2 {
        let mut col = vec![0.0; n];
        for b in 0..n {
            for a in 0..n {
                col[a] = state.g[a * n + b];
            }
            for a in 0..n {
                let lap = if a == 0 {
                    2.0 * col[1] - 2.0 * col[0]
                } else if a == n - 1 {
                    2.0 * col[n - 2] - 2.0 * col[n - 1]
                } else {
                    col[a - 1] - 2.0 * col[a] + col[a + 1]
                };
                rhs[a] = col[a] + alpha * lap;
            }
            if dirichlet {
                rhs[0] = 0.0;
                rhs[n - 1] = 0.0;
            }
            tridiag::solve_in_place(&sub, &diag, &sup, &mut rhs, &mut scratch);
            for a in 0..n {
                state.g[a * n + b] = rhs[a];
            }
        }
    }

    state.f = f_new;
    state.t += dt;
}

pub fn run_reduced(state: &mut ReducedState, dt: f64, n_steps: usize) {
    for _ in 0..n_steps {
        reduced_step(state, dt);
    }
}
