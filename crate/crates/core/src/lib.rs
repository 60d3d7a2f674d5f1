//! Simulation and analysis toolkit for the Poisson Boolean model with
//! random convex grains.
//!
//! The model places a homogeneous Poisson process of intensity `u` in
//! `R^d` and attaches to every point an independent copy of a random
//! convex body. Two points are linked when their grains overlap. The
//! crates here provide the convex geometry kernel ([`geom`]), the grain
//! distributions with heavy-tailed diameters ([`grains`]), window
//! sampling ([`process`]), intersection-graph construction ([`cluster`]),
//! Monte Carlo estimators ([`analysis`]) and the analytic
//! dense/sparse/robust classification ([`criteria`]).

pub mod analysis;
pub mod cluster;
pub mod criteria;
pub mod geom;
pub mod grains;
pub mod process;
pub mod rng;
pub mod stats;
