//! Uniform node-centered lattice shared by every solver in this module.

use alloc::vec::Vec;

/// Wall condition on the position axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Zero normal derivative: seeds reflect, mass is conserved.
    Neumann,
    /// Zero trace: seeds are absorbed at the walls.
    Dirichlet,
}

/// `nx` origin nodes and `ny` position nodes over the same interval
/// `[lo, hi]`, spacing `(hi - lo)/(n - 1)`, nodes on the walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lo: f64,
    pub hi: f64,
    pub bc: BoundaryCondition,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lo: f64, hi: f64, bc: BoundaryCondition) -> Self {
        assert!(nx >= 3 && ny >= 3, "need at least one interior node");
        assert!(lo.is_finite() && hi.is_finite() && lo < hi);
        Grid { nx, ny, lo, hi, bc }
    }

    pub fn hx(&self) -> f64 {
        (self.hi - self.lo) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.hi - self.lo) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + self.hx() * i as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.lo + self.hy() * j as f64
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        i * self.ny + j
    }

    /// Trapezoid weights on the origin axis (half weight on the walls).
    pub fn weights_x(&self) -> Vec<f64> {
        trapezoid_weights(self.nx, self.hx())
    }

    /// Trapezoid weights on the position axis.
    pub fn weights_y(&self) -> Vec<f64> {
        trapezoid_weights(self.ny, self.hy())
    }
}

pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = alloc::vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_span_the_interval() {
        let grid = Grid::new(5, 9, -2.0, 2.0, BoundaryCondition::Neumann);
        assert_eq!(grid.x(0), -2.0);
        assert_eq!(grid.x(4), 2.0);
        assert_eq!(grid.hx(), 1.0);
        assert_eq!(grid.hy(), 0.5);
        assert_eq!(grid.y(4), 0.0);
        assert_eq!(grid.idx(2, 3), 21);
    }

    #[test]
    fn trapezoid_weights_sum_to_the_length() {
        let grid = Grid::new(7, 7, 0.0, 3.0, BoundaryCondition::Dirichlet);
        let total: f64 = grid.weights_x().iter().sum();
        assert!((total - 3.0).abs() < 1e-12);
    }
}
