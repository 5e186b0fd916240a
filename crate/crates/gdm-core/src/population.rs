//! Point configurations: plants (immobile positions) and seeds
//! (origin/position pairs, only the position moves).

use crate::domain::Point;
use alloc::vec::Vec;

/// Plants as an ordered list of positions. Indices are stable: plants are
/// only ever appended.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlantPopulation {
    pub positions: Vec<Point>,
}

impl PlantPopulation {
    pub fn new(positions: Vec<Point>) -> Self {
        PlantPopulation { positions }
    }

    pub fn singleton(p: Point) -> Self {
        PlantPopulation { positions: alloc::vec![p] }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// A seed: `origin` is the parent plant position and never changes;
/// `position` is the current location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub origin: Point,
    pub position: Point,
}

/// Seeds as an ordered list. Removals swap the last element in, so an index
/// is only meaningful at the instant it is used.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeedPopulation {
    pub seeds: Vec<Seed>,
}

impl SeedPopulation {
    pub fn new() -> Self {
        SeedPopulation { seeds: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn push(&mut self, seed: Seed) {
        self.seeds.push(seed);
    }

    pub fn swap_remove(&mut self, index: usize) -> Seed {
        self.seeds.swap_remove(index)
    }
}
