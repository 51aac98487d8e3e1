//! Optimal sensor activation for grid-monitored wireless sensor networks.
//!
//! A fixed random deployment of `N` sensors watches a rectangular area
//! discretised into grid cells. Activating a subset of sensors trades
//! coverage (area whose cell centers fall in some active sensing disk)
//! against energy (number of active nodes); the combined objective
//! `f1^2 / f2` scores that trade-off. This crate provides the geometry and
//! fitness engine plus five seeded, reproducible optimizers over activation
//! vectors:
//!
//! - [`ga::AdaptiveGa`]: genetic algorithm with adaptive crossover and
//!   mutation probabilities,
//! - [`aco::BinaryAntColony`]: ant colony over a two-branch-per-bit
//!   digraph with Max-Min trail bounds,
//! - [`aco::iga_baca_run`]: the combined pipeline seeding the colony from
//!   the GA's final population,
//! - [`lion::LionOptimizer`]: lion optimization with hunting, mating,
//!   sorting and elimination,
//! - [`pso::BinaryPso`]: binary particle swarm optimization.
//!
//! All optimizers implement [`framework::Optimizer`], share elitism and
//! size-conservation contracts, and are driven by [`framework::run`].

pub mod aco;
pub mod coverage;
pub mod error;
pub mod framework;
pub mod ga;
pub mod lion;
pub mod pso;
pub mod rng;

pub use coverage::{
    covered_area, evaluate, find_coverage_holes, is_covered, random_deployment,
    random_deployment_with_radius, ControlVector, CoverageBasis, CoverageModel, Deployment,
    FitnessReport, HoleReport, MonitoringGrid, Objective, Sensor,
};
pub use error::{CoreError, Result};
pub use framework::{
    run, ConvergenceTrace, EvalContext, Incumbent, Optimizer, Population, Termination, TraceRecord,
};
pub use rng::RngStream;
