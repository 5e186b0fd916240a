//! Moment oracles and empirical-measure summaries: counting time series,
//! closed-form and ODE first moments, histograms, and kernel-density
//! intensity maps.

use crate::domain::Point;
use crate::float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Piecewise-constant counting record of a run: plant and seed totals after
/// each recorded instant, weighted by `1/K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub times: Vec<f64>,
    pub n_p: Vec<u64>,
    pub n_s: Vec<u64>,
    /// Mass per individual, `1/K`.
    pub weight: f64,
}

impl MomentSeries {
    pub fn new(weight: f64) -> Self {
        assert!(weight > 0.0 && weight.is_finite());
        MomentSeries { times: Vec::new(), n_p: Vec::new(), n_s: Vec::new(), weight }
    }

    /// Appends a record. Times must be nondecreasing; a record at the time
    /// already on top overwrites it (the last word at a shared stamp wins),
    /// keeping the stored times strictly increasing.
    pub fn push(&mut self, t: f64, n_p: u64, n_s: u64) {
        assert!(t.is_finite());
        if let Some(&last) = self.times.last() {
            assert!(t >= last, "times must be nondecreasing ({t} after {last})");
            if t == last {
                *self.n_p.last_mut().expect("nonempty") = n_p;
                *self.n_s.last_mut().expect("nonempty") = n_s;
                return;
            }
        }
        self.times.push(t);
        self.n_p.push(n_p);
        self.n_s.push(n_s);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Raw counts in force at time `t` (the last record at or before `t`).
    /// Panics when `t` precedes the first record.
    pub fn counts_at(&self, t: f64) -> (u64, u64) {
        let k = self.times.partition_point(|&s| s <= t);
        assert!(k > 0, "queried t={t} before the first record");
        (self.n_p[k - 1], self.n_s[k - 1])
    }

    /// Weighted masses `(N_p/K, N_s/K)` at time `t`.
    pub fn value_at(&self, t: f64) -> (f64, f64) {
        let (p, s) = self.counts_at(t);
        (p as f64 * self.weight, s as f64 * self.weight)
    }
}

/// Expected totals `(E N_p, E N_s)` at time `t` for constant unit maturation
/// and release rates, counting mean `mu`, started from one plant and no
/// seeds. Solves `E N_p' = E N_s`, `E N_s' = mu E N_p - E N_s` through the
/// eigen-decomposition: eigenvalues `(-1 +- sqrt(4 mu + 1))/2`.
pub fn closed_form_moments(mu: f64, t: f64) -> (f64, f64) {
    assert!(mu >= 0.0, "counting mean must be nonnegative, got {mu}");
    let delta = float::sqrt(4.0 * mu + 1.0);
    let rp = 0.5 * (delta - 1.0);
    let rm = 0.5 * (-delta - 1.0);
    let ep = float::exp(rp * t);
    let em = float::exp(rm * t);
    // The coefficient (delta + 1) multiplies the growing exponential: this is
    // the unique combination with E N_p(0) = 1 and E N_p'(0) = E N_s(0) = 0.
    let n_p = ((delta + 1.0) * ep + (delta - 1.0) * em) / (2.0 * delta);
    let n_s = mu * (ep - em) / delta;
    (n_p, n_s)
}

/// Classical 4th-order integration of the same moment system; an oracle for
/// `closed_form_moments` that does not share its algebra.
pub fn ode_moment_oracle(mu: f64, t: f64, dt: f64) -> (f64, f64) {
    assert!(mu >= 0.0, "counting mean must be nonnegative, got {mu}");
    assert!(dt > 0.0, "dt must be positive, got {dt}");
    assert!(t >= 0.0);
    if t == 0.0 {
        return (1.0, 0.0);
    }
    let n = (t / dt) as usize + 1;
    let h = t / n as f64;
    let rhs = |p: f64, s: f64| (s, mu * p - s);
    let (mut p, mut s) = (1.0f64, 0.0f64);
    for _ in 0..n {
        let (k1p, k1s) = rhs(p, s);
        let (k2p, k2s) = rhs(p + 0.5 * h * k1p, s + 0.5 * h * k1s);
        let (k3p, k3s) = rhs(p + 0.5 * h * k2p, s + 0.5 * h * k2s);
        let (k4p, k4s) = rhs(p + h * k3p, s + h * k3s);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    }
    (p, s)
}

/// Uniform cell grid over a box; cell values live at cell centers,
/// row-major `ix * cells[1] + iy` in dimension 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dimension: usize,
    pub lower: Point,
    pub upper: Point,
    pub cells: [usize; 2],
}

impl GridSpec {
    pub fn new(dimension: usize, lower: Point, upper: Point, cells: [usize; 2]) -> Self {
        assert!(dimension == 1 || dimension == 2);
        for i in 0..dimension {
            assert!(lower[i] < upper[i], "axis {i}: lower must be below upper");
            assert!(cells[i] >= 1);
        }
        GridSpec { dimension, lower, upper, cells }
    }

    pub fn n_cells(&self) -> usize {
        if self.dimension == 2 {
            self.cells[0] * self.cells[1]
        } else {
            self.cells[0]
        }
    }

    pub fn cell_size(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells[axis] as f64
    }

    /// Cell volume (length in d=1, area in d=2).
    pub fn cell_area(&self) -> f64 {
        let mut a = 1.0;
        for i in 0..self.dimension {
            a *= self.cell_size(i);
        }
        a
    }

    /// Center of cell `(ix, iy)`; `iy` ignored in dimension 1.
    pub fn center(&self, ix: usize, iy: usize) -> Point {
        let mut p = [0.0; 2];
        p[0] = self.lower[0] + (ix as f64 + 0.5) * self.cell_size(0);
        if self.dimension == 2 {
            p[1] = self.lower[1] + (iy as f64 + 0.5) * self.cell_size(1);
        }
        p
    }

    /// Flat index of the cell containing `p`, coordinates clamped into the
    /// box (a point on the upper face belongs to the last cell).
    pub fn cell_index(&self, p: Point) -> usize {
        let mut idx = 0;
        for i in 0..self.dimension {
            let t = (p[i] - self.lower[i]) / self.cell_size(i);
            let c = (float::floor(t).max(0.0) as usize).min(self.cells[i] - 1);
            idx = if i == 0 { c } else { idx * self.cells[i] + c };
        }
        idx
    }
}

/// Piecewise-constant density on a `GridSpec`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl Histogram {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n_cells());
        Histogram { grid, values }
    }

    /// `sum values * cellarea`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Density of the weighted empirical measure: cell value
/// `(points in cell) / (K * cell volume)`, total integral `N/K`.
pub fn histogram_measure(points: &[Point], grid: &GridSpec, k: f64) -> Histogram {
    assert!(k > 0.0 && k.is_finite());
    let mut values = vec![0.0f64; grid.n_cells()];
    let w = 1.0 / (k * grid.cell_area());
    for &p in points {
        values[grid.cell_index(p)] += w;
    }
    Histogram { grid: *grid, values }
}

/// `sum |a - b| * cellarea` over cells; the grids must agree.
pub fn l1_distance(a: &Histogram, b: &Histogram) -> Result<f64, String> {
    if a.grid != b.grid {
        return Err(String::from("histogram grids differ"));
    }
    let s: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| float::abs(x - y))
        .sum();
    Ok(s * a.grid.cell_area())
}

/// Gaussian kernel-density intensity map on a 2D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeGrid {
    pub grid: GridSpec,
    /// Intensity (density times point count) at cell centers.
    pub values: Vec<f64>,
    /// Per-axis kernel bandwidth.
    pub bandwidth: [f64; 2],
}

impl KdeGrid {
    /// `sum values * cellarea`; approximately the point count when the grid
    /// is wide enough to hold the smoothed mass.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Free-space Gaussian product-kernel intensity estimate with per-axis
/// bandwidth `n^(-1/6) * sd_i` (the classical n^(-1/(d+4)) rule in d = 2).
/// The result integrates to about the point count; no boundary correction.
pub fn kde_intensity(points: &[Point], grid: &GridSpec) -> Result<KdeGrid, String> {
    assert_eq!(grid.dimension, 2, "intensity maps are two-dimensional");
    let n = points.len();
    if n < 2 {
        return Err(format!("need at least 2 points, got {n}"));
    }
    let mut mean = [0.0f64; 2];
    for p in points {
        mean[0] += p[0];
        mean[1] += p[1];
    }
    mean[0] /= n as f64;
    mean[1] /= n as f64;
    let mut var = [0.0f64; 2];
    for p in points {
        var[0] += (p[0] - mean[0]) * (p[0] - mean[0]);
        var[1] += (p[1] - mean[1]) * (p[1] - mean[1]);
    }
    let factor = float::powf(n as f64, -1.0 / 6.0);
    let mut bw = [0.0f64; 2];
    for i in 0..2 {
        let sd = float::sqrt(var[i] / (n - 1) as f64);
        if !(sd > 0.0) {
            return Err(String::from("degenerate point cloud: zero bandwidth"));
        }
        bw[i] = factor * sd;
    }

    let (nx, ny) = (grid.cells[0], grid.cells[1]);
    let xs: Vec<f64> = (0..nx).map(|i| grid.center(i, 0)[0]).collect();
    let ys: Vec<f64> = (0..ny).map(|j| grid.center(0, j)[1]).collect();
    let norm = 1.0 / (2.0 * PI * bw[0] * bw[1]);
    let mut values = vec![0.0f64; nx * ny];
    let mut kx = vec![0.0f64; nx];
    let mut ky = vec![0.0f64; ny];
    for p in points {
        for (i, &x) in xs.iter().enumerate() {
            let u = (x - p[0]) / bw[0];
            kx[i] = float::exp(-0.5 * u * u);
        }
        for (j, &y) in ys.iter().enumerate() {
            let v = (y - p[1]) / bw[1];
            ky[j] = float::exp(-0.5 * v * v);
        }
        for i in 0..nx {
            if kx[i] == 0.0 {
                continue;
            }
            let row = &mut values[i * ny..(i + 1) * ny];
            for j in 0..ny {
                row[j] += kx[i] * ky[j];
            }
        }
    }
    for v in &mut values {
        *v *= norm;
    }
    Ok(KdeGrid { grid: *grid, values, bandwidth: bw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn moments_at_zero_and_mu_zero() {
        assert_eq!(closed_form_moments(1.0, 0.0), (1.0, 0.0));
        for t in [0.5, 1.0, 7.0] {
            let (p, s) = closed_form_moments(0.0, t);
            assert!((p - 1.0).abs() < 1e-14 && s.abs() < 1e-14);
        }
    }

    #[test]
    fn frozen_moment_values() {
        let (p, s) = closed_form_moments(1.0, 1.0);
        assert!((p - 1.3972965165000442).abs() < 1e-12);
        assert!((s - 0.7410279215235773).abs() < 1e-12);
        let (p3, s3) = closed_form_moments(1.0, 3.0);
        assert!((p3 - 4.623079546170853).abs() < 1e-12);
        assert!((s3 - 2.8524018943243887).abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        for mu in [0.5, 1.0, 2.0] {
            for t in [0.5, 1.0, 3.0] {
                let (cp, cs) = closed_form_moments(mu, t);
                let (op, os) = ode_moment_oracle(mu, t, 1e-4);
                assert!((cp - op).abs() < 1e-8, "mu={mu} t={t}: {cp} vs {op}");
                assert!((cs - os).abs() < 1e-8, "mu={mu} t={t}: {cs} vs {os}");
            }
        }
    }

    #[test]
    fn plant_moment_nondecreasing_with_flat_start() {
        // E N_p'(0) = E N_s(0) = 0 pins the eigen-coefficients
        let d = 1e-6;
        let (p0, _) = closed_form_moments(1.0, 0.0);
        let (pd, _) = closed_form_moments(1.0, d);
        assert!((pd - p0) / d < 1e-4, "initial slope should vanish");
        let mut last = 1.0;
        for i in 1..=300 {
            let (p, _) = closed_form_moments(1.0, i as f64 * 0.01);
            assert!(p >= last - 1e-12);
            last = p;
        }
    }

    #[test]
    fn seed_plant_ratio_approaches_eigenvector() {
        let (p, s) = ode_moment_oracle(1.0, 30.0, 1e-3);
        let golden = (5.0f64.sqrt() - 1.0) / 2.0;
        assert!((s / p - golden).abs() < 1e-9);
    }

    #[test]
    fn series_step_lookup() {
        let mut m = MomentSeries::new(1.0);
        m.push(0.0, 1, 0);
        m.push(0.7, 1, 3);
        m.push(1.5, 2, 2);
        assert_eq!(m.counts_at(0.0), (1, 0));
        assert_eq!(m.counts_at(0.69), (1, 0));
        assert_eq!(m.counts_at(0.7), (1, 3));
        assert_eq!(m.counts_at(99.0), (2, 2));
    }

    #[test]
    fn series_coalesces_equal_times() {
        let mut m = MomentSeries::new(1.0);
        m.push(1.0, 1, 0);
        m.push(1.0, 1, 4);
        assert_eq!(m.len(), 1);
        assert_eq!(m.counts_at(1.0), (1, 4));
    }

    #[test]
    #[should_panic]
    fn series_rejects_decreasing_times() {
        let mut m = MomentSeries::new(1.0);
        m.push(1.0, 1, 0);
        m.push(0.5, 1, 1);
    }

    #[test]
    fn histogram_single_point() {
        let grid = GridSpec::new(2, [0.0, 0.0], [1.0, 1.0], [4, 4]);
        let h = histogram_measure(&[[0.1, 0.9]], &grid, 1.0);
        assert!((h.integral() - 1.0).abs() < 1e-12);
        let idx = grid.cell_index([0.1, 0.9]);
        assert!((h.values[idx] - 16.0).abs() < 1e-12);
        assert_eq!(h.values.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn histogram_empty_and_boundary_points() {
        let grid = GridSpec::new(1, [0.0, 0.0], [2.0, 0.0], [8, 1]);
        let h = histogram_measure(&[], &grid, 5.0);
        assert!(h.values.iter().all(|v| *v == 0.0));
        // exact upper corner lands in the last cell
        let h = histogram_measure(&[[2.0, 0.0]], &grid, 1.0);
        assert!(h.values[7] > 0.0);
    }

    #[test]
    fn histogram_of_uniform_points_is_flat() {
        let grid = GridSpec::new(2, [0.0, 0.0], [1.0, 1.0], [10, 10]);
        let mut rng = RngStream::new(9, 0);
        let n = 100_000usize;
        let pts: Vec<_> = (0..n)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let h = histogram_measure(&pts, &grid, n as f64);
        // 1000 expected per cell, sd 3.2%; 0.15 is ~4.7 sigma on the max
        for v in &h.values {
            assert!((v - 1.0).abs() < 0.15, "cell value {v} strays from 1");
        }
        let uniform = Histogram::from_values(grid, alloc::vec![1.0; 100]);
        assert!(l1_distance(&h, &uniform).unwrap() < 0.1);
    }

    #[test]
    fn l1_distance_basics() {
        let grid = GridSpec::new(2, [0.0, 0.0], [1.0, 1.0], [5, 5]);
        let a = Histogram::from_values(grid, alloc::vec![1.0; 25]);
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        let z = Histogram::from_values(grid, alloc::vec![0.0; 25]);
        assert!((l1_distance(&a, &z).unwrap() - 1.0).abs() < 1e-12);
        let other = GridSpec::new(2, [0.0, 0.0], [1.0, 1.0], [4, 4]);
        let b = Histogram::from_values(other, alloc::vec![0.0; 16]);
        assert!(l1_distance(&a, &b).is_err());
    }

    #[test]
    fn kde_two_bumps_and_integral() {
        let grid = GridSpec::new(2, [-10.0, -10.0], [10.0, 10.0], [40, 40]);
        // clusters near (-5,-5) and (5,5); the bandwidth comes from the
        // global spread, so enough points are needed for it to shrink
        // below the cluster separation
        let mut rng = RngStream::new(12, 0);
        let mut pts = Vec::new();
        for s in [-1.0f64, 1.0] {
            for _ in 0..100 {
                let dx: f64 = StandardNormal.sample(&mut rng);
                let dy: f64 = StandardNormal.sample(&mut rng);
                pts.push([5.0 * s + 0.3 * dx, 5.0 * s + 0.3 * dy]);
            }
        }
        let kde = kde_intensity(&pts, &grid).unwrap();
        let hot = |p: Point| kde.values[grid.cell_index(p)];
        assert!(hot([5.0, 5.0]) > 50.0 * hot([0.0, 0.0]));
        assert!(hot([-5.0, -5.0]) > 50.0 * hot([0.0, 0.0]));
        let m = kde.values.iter().cloned().fold(0.0f64, f64::max);
        let am = kde.values.iter().position(|v| *v == m).unwrap();
        let (ix, iy) = (am / 40, am % 40);
        let c = grid.center(ix, iy);
        assert!(crate::float::dist(c, [5.0, 5.0], 2) < 1.0 || crate::float::dist(c, [-5.0, -5.0], 2) < 1.0);
    }

    #[test]
    fn kde_standard_normal_cloud() {
        let mut rng = RngStream::new(4, 0);
        let n = 10_000usize;
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let y: f64 = StandardNormal.sample(&mut rng);
                [x, y]
            })
            .collect();
        let grid = GridSpec::new(2, [-8.0, -8.0], [8.0, 8.0], [128, 128]);
        let kde = kde_intensity(&pts, &grid).unwrap();
        assert!(kde.values.iter().all(|v| *v >= 0.0));
        let at_origin = kde.values[grid.cell_index([0.0, 0.0])];
        let want = n as f64 / (2.0 * PI);
        assert!(
            (at_origin - want).abs() < 0.1 * want,
            "origin intensity {at_origin} vs {want}"
        );
        let total = kde.integral();
        assert!(
            (total - n as f64).abs() < 0.01 * n as f64,
            "integral {total} vs count {n}"
        );
    }

    #[test]
    fn kde_rejects_degenerate_cloud() {
        let grid = GridSpec::new(2, [0.0, 0.0], [1.0, 1.0], [4, 4]);
        assert!(kde_intensity(&[[0.5, 0.5]], &grid).is_err());
        assert!(kde_intensity(&[[0.5, 0.5], [0.5, 0.5]], &grid).is_err());
    }
}
