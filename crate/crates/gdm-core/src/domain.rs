//! Spatial domain: a box with reflecting or killing boundary, or all of
//! `R^d` with no boundary.

use crate::float;

/// Maximum supported spatial dimension.
pub const MAX_DIM: usize = 2;

/// A point in dimension `d <= MAX_DIM`; coordinates past `d` are 0 and ignored.
pub type Point = [f64; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    /// Axis-aligned box; only the first `dimension` axes are meaningful.
    Box { lower: Point, upper: Point },
    AllSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Reflect,
    Kill,
    /// Only valid with `DomainKind::AllSpace`.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub dimension: usize,
    pub kind: DomainKind,
    pub boundary: Boundary,
}

impl Domain {
    pub fn reflecting_box(dimension: usize, lower: Point, upper: Point) -> Self {
        Domain { dimension, kind: DomainKind::Box { lower, upper }, boundary: Boundary::Reflect }
    }

    pub fn killing_box(dimension: usize, lower: Point, upper: Point) -> Self {
        Domain { dimension, kind: DomainKind::Box { lower, upper }, boundary: Boundary::Kill }
    }

    pub fn all_space(dimension: usize) -> Self {
        Domain { dimension, kind: DomainKind::AllSpace, boundary: Boundary::None }
    }

    /// Point lies in the closed domain.
    pub fn contains(&self, p: Point) -> bool {
        match self.kind {
            DomainKind::AllSpace => true,
            DomainKind::Box { lower, upper } => {
                (0..self.dimension).all(|i| p[i] >= lower[i] && p[i] <= upper[i])
            }
        }
    }

    /// Euclidean diameter of a box; `None` for all-space.
    pub fn diameter(&self) -> Option<f64> {
        match self.kind {
            DomainKind::AllSpace => None,
            DomainKind::Box { lower, upper } => {
                let mut s = 0.0;
                for i in 0..self.dimension {
                    let w = upper[i] - lower[i];
                    s += w * w;
                }
                Some(float::sqrt(s))
            }
        }
    }

    /// Per-axis widths of a box.
    pub fn widths(&self) -> Option<Point> {
        match self.kind {
            DomainKind::AllSpace => None,
            DomainKind::Box { lower, upper } => {
                let mut w = [0.0; MAX_DIM];
                for i in 0..self.dimension {
                    w[i] = upper[i] - lower[i];
                }
                Some(w)
            }
        }
    }
}

/// Folds a point into a box coordinatewise, the exact image of normal
/// reflection for axis-aligned faces: each coordinate is mapped by the
/// triangle wave of period `2(hi-lo)` fixing `[lo,hi]`.
///
/// Panics on non-finite coordinates or a non-box domain; interior points are
/// fixed, so the map is idempotent on its image.
pub fn reflect_into(domain: &Domain, p: Point) -> Point {
    let (lower, upper) = match domain.kind {
        DomainKind::Box { lower, upper } => (lower, upper),
        DomainKind::AllSpace => panic!("reflect_into requires a box domain"),
    };
    let mut out = p;
    for i in 0..domain.dimension {
        assert!(p[i].is_finite(), "reflect_into: non-finite coordinate");
        if p[i] >= lower[i] && p[i] <= upper[i] {
            continue; // already inside; keep the exact bits
        }
        let w = upper[i] - lower[i];
        let period = 2.0 * w;
        let mut t = p[i] - lower[i];
        t -= period * float::floor(t / period);
        // t in [0, 2w); fold the upper half back
        out[i] = if t <= w { lower[i] + t } else { upper[i] - (t - w) };
        // guard against rounding at the fold
        out[i] = out[i].clamp(lower[i], upper[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_box() -> Domain {
        Domain::reflecting_box(1, [0.0, 0.0], [1.0, 0.0])
    }

    #[test]
    fn interior_point_fixed() {
        let d = unit_box();
        assert_eq!(reflect_into(&d, [0.5, 0.0])[0], 0.5);
    }

    #[test]
    fn single_fold() {
        let d = unit_box();
        assert!((reflect_into(&d, [1.2, 0.0])[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn iterated_fold() {
        // -2.3 -> 2.3 -> -0.3 -> 0.3 under repeated face reflections
        let d = unit_box();
        assert!((reflect_into(&d, [-2.3, 0.0])[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn two_dim_folds_each_axis() {
        let d = Domain::reflecting_box(2, [0.0, -1.0], [1.0, 1.0]);
        let q = reflect_into(&d, [1.2, -1.5]);
        assert!((q[0] - 0.8).abs() < 1e-12);
        assert!((q[1] - -0.5).abs() < 1e-12);
    }

    #[test]
    #[should_panic]
    fn non_finite_rejected() {
        reflect_into(&unit_box(), [f64::NAN, 0.0]);
    }

    #[test]
    fn contains_and_diameter() {
        let d = Domain::reflecting_box(2, [-100.0, -100.0], [100.0, 100.0]);
        assert!(d.contains([0.0, 0.0]));
        assert!(!d.contains([100.1, 0.0]));
        assert!((d.diameter().unwrap() - 200.0 * 2.0f64.sqrt()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn fold_lands_inside_and_is_idempotent(x in -1e6f64..1e6, lo in -10.0f64..0.0, w in 0.1f64..10.0) {
            let d = Domain::reflecting_box(1, [lo, 0.0], [lo + w, 0.0]);
            let q = reflect_into(&d, [x, 0.0]);
            prop_assert!(q[0] >= lo && q[0] <= lo + w);
            let q2 = reflect_into(&d, q);
            prop_assert_eq!(q[0].to_bits(), q2[0].to_bits());
        }

        #[test]
        fn fold_matches_naive_iteration(x in -50.0f64..50.0) {
            let d = unit_box();
            // reference: reflect across violated faces one at a time
            let mut y = x;
            for _ in 0..500 {
                if y < 0.0 { y = -y } else if y > 1.0 { y = 2.0 - y } else { break }
            }
            let q = reflect_into(&d, [x, 0.0]);
            prop_assert!((q[0] - y).abs() < 1e-9);
        }
    }
}
