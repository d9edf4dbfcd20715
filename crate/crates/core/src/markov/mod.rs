//! Markov chains whose jump structure pushes the state toward higher indices.
//!
//! States are indexed `0..n` in code; state `k + 1` in the usual 1-based
//! numbering lives at index `k`. Probability distributions are row vectors
//! acting on the left of the transition matrix (`pi * P`).

mod hessenberg;
mod matrix;
mod rng;
mod stationary;

pub use hessenberg::{
    expected_state_closed, hessenberg_build, hessenberg_stationary_closed, limit_expected_state,
};
pub use matrix::{
    build_random_transition, validate_assumptions, AssumptionReport, AssumptionViolation,
    ChainSpec, Monotonicity, TransitionMatrix, ROW_SUM_TOLERANCE,
};
pub use rng::RandomSource;
pub use stationary::{
    expected_state, residual, stationary_direct, stationary_power, PowerOptions,
    StationaryDistribution, DEFAULT_MAX_ITERATIONS, DEFAULT_POWER_TOLERANCE, PIVOT_TOLERANCE,
};
