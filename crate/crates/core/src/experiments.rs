//! Scripted runs that regenerate the population and Markov-chain evidence:
//! long population traces, random-chain sweeps over `delta`, and the
//! closed-form verification grid.

use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::markov::{
    build_random_transition, expected_state, expected_state_closed, hessenberg_build,
    hessenberg_stationary_closed, stationary_direct, ChainSpec, RandomSource,
    StationaryDistribution,
};
use crate::verhulst::{simulate, PopulationVector, VerhulstParams};

/// Traits whose head counts are tracked as separate curves.
pub const SECTION_TRAITS: [usize; 5] = [5, 10, 15, 20, 25];

pub const DEFAULT_GENERATIONS: usize = 5000;
pub const DEFAULT_SWEEP_STATES: usize = 50;
pub const DEFAULT_SWEEP_EPSILON: f64 = 0.1;
pub const DEFAULT_SWEEP_DELTAS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const DEFAULT_VERIFY_DELTAS: [f64; 5] = [0.05, 0.1, 0.2, 0.25, 0.4];
pub const DEFAULT_VERIFY_EPSILON: f64 = 0.1;

/// Maximum closed-form deviation accepted by [`verify_closed_form`].
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationExperimentResult {
    pub totals: Vec<f64>,
    /// `(v, P_n(v) for every generation)` for each tracked trait within range.
    pub sections: Vec<(usize, Vec<f64>)>,
    /// Final generation.
    pub histogram: PopulationVector,
    pub expected_velocity: Vec<Option<f64>>,
}

impl PopulationExperimentResult {
    pub fn section(&self, v: usize) -> Option<&[f64]> {
        self.sections
            .iter()
            .find(|(t, _)| *t == v)
            .map(|(_, c)| c.as_slice())
    }
}

pub fn run_population_experiment(
    params: &VerhulstParams,
    initial: &PopulationVector,
    generations: usize,
) -> Result<PopulationExperimentResult> {
    let trace = simulate(initial, params, generations)?;
    let sections = SECTION_TRAITS
        .iter()
        .filter(|&&v| v <= params.v_max())
        .map(|&v| (v, trace.section(v)))
        .collect();
    Ok(PopulationExperimentResult {
        histogram: trace.last().clone(),
        sections,
        totals: trace.totals,
        expected_velocity: trace.expected_velocities,
    })
}

/// One random chain of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub outcome: Result<SweepRun, ModelError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub distribution: StationaryDistribution,
    pub expected_state: f64,
    pub residual: f64,
}

fn sweep_one(n: usize, epsilon: f64, delta: f64, seed: u64) -> Result<SweepRun> {
    let spec = ChainSpec::new(n, epsilon, delta)?;
    let matrix = build_random_transition(&spec, &mut RandomSource::new(seed));
    let distribution = stationary_direct(&matrix)?;
    Ok(SweepRun {
        expected_state: distribution.expected_state(),
        residual: distribution.residual,
        distribution,
    })
}

/// Builds one random chain per `(delta, seed)` pair and records its
/// stationary distribution. Records are ordered by `delta` (as given), then
/// seed; a failed run is kept as an error record.
pub fn run_delta_sweep(n: usize, epsilon: f64, deltas: &[f64], seeds: &[u64]) -> Vec<SweepResult> {
    let jobs: Vec<(f64, u64)> = deltas
        .iter()
        .flat_map(|&d| seeds.iter().map(move |&s| (d, s)))
        .collect();
    jobs.into_par_iter()
        .map(|(delta, seed)| SweepResult {
            n,
            epsilon,
            delta,
            seed,
            outcome: sweep_one(n, epsilon, delta, seed),
        })
        .collect()
}

/// Mean expected state per delta over the successful runs, in input order.
pub fn mean_expected_state(results: &[SweepResult], deltas: &[f64]) -> Vec<(f64, Option<f64>)> {
    deltas
        .iter()
        .map(|&d| {
            let values: Vec<f64> = results
                .iter()
                .filter(|r| r.delta == d)
                .filter_map(|r| r.outcome.as_ref().ok().map(|run| run.expected_state))
                .collect();
            let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
            (d, mean)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck {
    pub n: usize,
    pub delta: f64,
    /// `max_k |pi_closed_k - pi_direct_k|`.
    pub distribution_deviation: f64,
    pub expected_state_deviation: f64,
}

impl ClosedFormCheck {
    pub fn max_deviation(&self) -> f64 {
        self.distribution_deviation.max(self.expected_state_deviation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    pub epsilon: f64,
    pub tolerance: f64,
    pub checks: Vec<ClosedFormCheck>,
}

impl ClosedFormReport {
    pub fn max_distribution_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.distribution_deviation).fold(0.0, f64::max)
    }

    pub fn max_expected_state_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.expected_state_deviation).fold(0.0, f64::max)
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_distribution_deviation().max(self.max_expected_state_deviation())
    }

    /// Pairs whose deviation exceeds the tolerance.
    pub fn flagged(&self) -> Vec<&ClosedFormCheck> {
        self.checks
            .iter()
            .filter(|c| !(c.max_deviation() < self.tolerance))
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.flagged().is_empty()
    }
}

/// Compares the closed-form stationary distribution and expected state of
/// the tridiagonal chain against a direct linear solve for every
/// `(n, delta)` pair.
pub fn verify_closed_form(
    ns: &[usize],
    deltas: &[f64],
    epsilon: f64,
    tolerance: f64,
) -> Result<ClosedFormReport> {
    let mut checks = Vec::with_capacity(ns.len() * deltas.len());
    for &n in ns {
        for &delta in deltas {
            let spec = ChainSpec::new(n, epsilon, delta)?;
            let closed = hessenberg_stationary_closed(&spec)?;
            let direct = stationary_direct(&hessenberg_build(&spec)?)?;
            let distribution_deviation = closed
                .pi
                .iter()
                .zip(&direct.pi)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let expected_state_deviation =
                (expected_state_closed(&spec)? - expected_state(&direct.pi)).abs();
            checks.push(ClosedFormCheck {
                n,
                delta,
                distribution_deviation,
                expected_state_deviation,
            });
        }
    }
    Ok(ClosedFormReport {
        epsilon,
        tolerance,
        checks,
    })
}
