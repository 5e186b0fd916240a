//! Running norm monitor with the a-priori growth envelopes.
//!
//! The coupled system obeys
//!
//! ```text
//! ||f(t)||_2 <= ||f(0)||_2 exp(C0 t^2)
//! ||g(t)||_2 <= C1 ||f(0)||_2 int_0^t exp(C0 s^2) ds
//! ```
//!
//! with `C1 = mu1 sup_x ||D(x,.)||_{L2}` and `C0 = sup(lambda) C1 / 2`, both
//! computed here by quadrature from the tabulated coefficients actually in
//! play. The time integral accumulates by trapezoid over the record times;
//! the integrand is convex, so the quadrature overestimates and the envelope
//! only widens. H1 norms use centered differences (one-sided at the walls)
//! and are recorded for inspection; the checked envelopes are the L2 pair.

use super::stepper::step_viscous;
use super::PdeState;
use crate::float;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEntry {
    pub t: f64,
    pub l2_f: f64,
    pub l2_g: f64,
    pub h1_f: f64,
    pub h1_g: f64,
    pub bound_f: f64,
    pub bound_g: f64,
}

#[derive(Debug, Clone)]
pub struct NormMonitor {
    pub c0: f64,
    pub c1: f64,
    pub f0_l2: f64,
    pub entries: Vec<NormEntry>,
    last_t: f64,
    last_integrand: f64,
    integral: f64,
}

impl NormMonitor {
    /// Reads the growth constants off a fresh (`t == 0`) state.
    pub fn new(state: &PdeState) -> Self {
        assert_eq!(state.t, 0.0, "the envelopes are anchored at t = 0");
        let wy = state.grid.weights_y();
        let ny = state.grid.ny;
        let mut sup_row = 0.0f64;
        for i in 0..state.grid.nx {
            let row = &state.d_kernel[i * ny..(i + 1) * ny];
            let sq: f64 = row.iter().zip(&wy).map(|(d, w)| w * d * d).sum();
            sup_row = sup_row.max(sq);
        }
        let c1 = state.mu1 * float::sqrt(sup_row);
        let c0 = state.lambda_max() * c1 / 2.0;
        NormMonitor {
            c0,
            c1,
            f0_l2: weighted_l2(&state.f, &wy),
            entries: Vec::new(),
            last_t: 0.0,
            last_integrand: 1.0,
            integral: 0.0,
        }
    }

    /// Appends one entry; record times must not decrease.
    pub fn record(&mut self, state: &PdeState) {
        let t = state.t;
        assert!(t >= self.last_t, "records must move forward in time");
        let integrand = float::exp(self.c0 * t * t);
        self.integral += 0.5 * (t - self.last_t) * (self.last_integrand + integrand);
        self.last_t = t;
        self.last_integrand = integrand;

        let grid = &state.grid;
        let wy = grid.weights_y();
        let wx = grid.weights_x();
        let l2_f = weighted_l2(&state.f, &wy);
        let df = derivative_l2_sq(&state.f, grid.hy(), &wy);
        let (mut g_sq, mut gy_sq) = (0.0, 0.0);
        for i in 0..grid.nx {
            let row = &state.g[i * grid.ny..(i + 1) * grid.ny];
            let row_sq: f64 = row.iter().zip(&wy).map(|(g, w)| w * g * g).sum();
            g_sq += wx[i] * row_sq;
            gy_sq += wx[i] * derivative_l2_sq(row, grid.hy(), &wy);
        }
        let mut gx_sq = 0.0;
        let mut col = alloc::vec![0.0; grid.nx];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                col[i] = state.g[i * grid.ny + j];
            }
            gx_sq += wy[j] * derivative_l2_sq(&col, grid.hx(), &wx);
        }
        self.entries.push(NormEntry {
            t,
            l2_f,
            l2_g: float::sqrt(g_sq),
            h1_f: float::sqrt(l2_f * l2_f + df),
            h1_g: float::sqrt(g_sq + gx_sq + gy_sq),
            bound_f: self.f0_l2 * integrand,
            bound_g: self.c1 * self.f0_l2 * self.integral,
        });
    }

    /// True when every recorded L2 norm sits inside its envelope, with
    /// `slack` relative headroom for discretization error.
    pub fn l2_bounds_hold(&self, slack: f64) -> bool {
        self.entries.iter().all(|e| {
            e.l2_f <= e.bound_f * (1.0 + slack) + 1e-14
                && e.l2_g <= e.bound_g * (1.0 + slack) + 1e-14
        })
    }
}

/// Steps the state (viscous machinery, so `epsilon == 0` is the base
/// system) and records every `every` steps plus the endpoints.
pub fn monitor_norms(state: &mut PdeState, dt: f64, n_steps: usize, every: usize) -> NormMonitor {
    assert!(every > 0);
    let mut monitor = NormMonitor::new(state);
    monitor.record(state);
    for step in 1..=n_steps {
        step_viscous(state, dt);
        if step % every == 0 || step == n_steps {
            monitor.record(state);
        }
    }
    monitor
}

fn weighted_l2(values: &[f64], w: &[f64]) -> f64 {
    float::sqrt(values.iter().zip(w).map(|(v, w)| w * v * v).sum())
}

/// Squared weighted L2 norm of the difference-quotient derivative.
fn derivative_l2_sq(values: &[f64], h: f64, w: &[f64]) -> f64 {
    let n = values.len();
    let mut total = 0.0;
    for j in 0..n {
        let d = if j == 0 {
            (values[1] - values[0]) / h
        } else if j == n - 1 {
            (values[n - 1] - values[n - 2]) / h
        } else {
            (values[j + 1] - values[j - 1]) / (2.0 * h)
        };
        total += w[j] * d * d;
    }
    total
}
