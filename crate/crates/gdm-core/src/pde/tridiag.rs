//! Thomas elimination, the workhorse behind every implicit sweep.

/// Solves a tridiagonal system in place: `rhs` becomes the solution.
/// `sub[i]` multiplies `u[i-1]` (entry 0 unused), `sup[i]` multiplies
/// `u[i+1]` (last entry unused). `scratch` must have the same length.
/// The sweeps here are strictly diagonally dominant, so a vanishing pivot
/// means a scheme bug and panics.
pub fn solve_in_place(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = diag.len();
    assert!(n >= 1);
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n && scratch.len() == n);
    let mut pivot = diag[0];
    assert!(pivot.abs() > 1e-300, "singular tridiagonal pivot");
    scratch[0] = sup[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * scratch[i - 1];
        assert!(pivot.abs() > 1e-300, "singular tridiagonal pivot");
        scratch[i] = sup[i] / pivot;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}
