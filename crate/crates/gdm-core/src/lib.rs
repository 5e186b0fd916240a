//! Core of the grouped-dispersal toolkit.
//!
//! A population of immobile plants releases groups of seeds: each release
//! deposits `kappa` seeds at a common barycenter drawn from a dispersal
//! kernel around the parent, the seeds then diffuse independently and mature
//! into plants at a position-dependent rate. This crate houses the exact
//! continuous-time simulator of that measure-valued dynamics, the solvers for
//! its large-population limit (an ultra-parabolic reaction-diffusion system
//! coupling the plant density `f(t,x)` to the seed density `g(t,x,y)` over
//! origin/position pairs), and the observables used to validate one against
//! the other.
//!
//! `no_std`-compatible (requires `alloc`); the `std` feature (default) only
//! switches float math from `libm` to the standard library intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod domain;
pub mod float;
pub mod kernels;
pub mod observables;
pub mod params;
pub mod pde;
pub mod population;
pub mod rng;
pub mod sim;

pub use domain::{reflect_into, Boundary, Domain, DomainKind, Point, MAX_DIM};
pub use params::{
    validate, CountingDistribution, DiffusionSpec, MaturationRate, ModelParams, Normalization,
    ValidationResult, Violation,
};
pub use population::{PlantPopulation, Seed, SeedPopulation};
pub use rng::RngStream;
