use crate::error::{ModelError, Result};

use super::rng::RandomSource;

/// Absolute tolerance on each row sum of a transition matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Tolerance used when comparing a diagonal entry against `1 - epsilon`.
const DIAGONAL_TOLERANCE: f64 = 1e-12;

/// Size and jump parameters of a drift chain.
///
/// `epsilon` is the off-diagonal mass of every row; `delta` is the share of
/// that mass sent to lower states in interior rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    n: usize,
    epsilon: f64,
    delta: f64,
}

impl ChainSpec {
    pub fn new(n: usize, epsilon: f64, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(ModelError::invalid("n", format!("{n} states; need at least 2")));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(ModelError::invalid("epsilon", format!("{epsilon} is outside (0, 0.5)")));
        }
        if !(delta > 0.0 && delta < 0.5) {
            return Err(ModelError::invalid("delta", format!("{delta} is outside (0, 0.5)")));
        }
        Ok(ChainSpec { n, epsilon, delta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Row-stochastic `n x n` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates that every entry lies in `[0, 1]` and every row sums to one
    /// within [`ROW_SUM_TOLERANCE`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(ModelError::invalid("matrix", "no rows"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            check_row(i, &row)?;
            entries.extend(row);
        }
        Ok(TransitionMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `p(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.n)
    }

    /// `pi * P`.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (p_i, row) in pi.iter().zip(self.rows()) {
            for (o, p_ij) in out.iter_mut().zip(row) {
                *o += p_i * p_ij;
            }
        }
        out
    }
}

fn check_row(i: usize, row: &[f64]) -> Result<()> {
    if let Some((j, p)) = row
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(ModelError::invalid(
            "matrix",
            format!("p({}, {}) = {p} is outside [0, 1]", i + 1, j + 1),
        ));
    }
    let sum: f64 = row.iter().sum();
    if !((sum - 1.0).abs() <= ROW_SUM_TOLERANCE) {
        return Err(ModelError::invalid(
            "matrix",
            format!("row {} sums to {sum}", i + 1),
        ));
    }
    Ok(())
}

fn rescaled(mut draws: Vec<f64>, mass: f64) -> Vec<f64> {
    let sum: f64 = draws.iter().sum();
    for d in &mut draws {
        *d = mass * *d / sum;
    }
    draws
}

fn ascending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Random drift chain.
///
/// Every diagonal entry is `1 - epsilon`. The off-diagonal part of a row is
/// a vector of uniform draws rescaled to the row's jump mass: the first row
/// sends all `epsilon` upward (sorted descending away from the diagonal), the
/// last row sends all of it downward (sorted ascending toward the diagonal),
/// and interior rows split it `delta * epsilon` down and
/// `(1 - delta) * epsilon` up. Left blocks are drawn before right blocks.
pub fn build_random_transition(spec: &ChainSpec, rng: &mut RandomSource) -> TransitionMatrix {
    let n = spec.n;
    let eps = spec.epsilon;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let row = &mut entries[i * n..(i + 1) * n];
        row[i] = 1.0 - eps;
        if i == 0 {
            let up = descending(rescaled(rng.uniform(n - 1), eps));
            row[1..].copy_from_slice(&up);
        } else if i == n - 1 {
            let down = ascending(rescaled(rng.uniform(n - 1), eps));
            row[..n - 1].copy_from_slice(&down);
        } else {
            let down = ascending(rescaled(rng.uniform(i), spec.delta * eps));
            let up = descending(rescaled(rng.uniform(n - 1 - i), (1.0 - spec.delta) * eps));
            row[..i].copy_from_slice(&down);
            row[i + 1..].copy_from_slice(&up);
        }
    }
    TransitionMatrix { n, entries }
}

/// Whether the monotone-tail check demands strict or weak monotonicity.
///
/// Randomly built chains are strictly monotone; the tridiagonal chain has
/// runs of zeros beyond its first off-diagonal and only passes weakly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Strict,
    Weak,
}

/// A failed structural assumption, with 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionViolation {
    /// `p(i, i) != 1 - epsilon`.
    Diagonal { row: usize, value: f64 },
    /// The adjacent jump `p(row, col)` is zero.
    NoAdjacentJump { row: usize, col: usize },
    /// `p(row, col)` and `p(row, col + 1)` break monotonicity toward the diagonal.
    Monotone { row: usize, col: usize, left: f64, right: f64 },
    /// Downward mass not below upward mass in an interior row.
    Drift { row: usize, down: f64, up: f64 },
}

/// Outcome of [`validate_assumptions`], one violation list per assumption.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssumptionReport {
    /// Constant diagonal `1 - epsilon`.
    pub diagonal: Vec<AssumptionViolation>,
    /// Positive adjacent jumps and tails that shrink away from the diagonal.
    pub monotone_tails: Vec<AssumptionViolation>,
    /// Interior rows push more mass up than down.
    pub upward_drift: Vec<AssumptionViolation>,
}

impl AssumptionReport {
    pub fn diagonal_ok(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn monotone_tails_ok(&self) -> bool {
        self.monotone_tails.is_empty()
    }

    pub fn upward_drift_ok(&self) -> bool {
        self.upward_drift.is_empty()
    }

    pub fn all_ok(&self) -> bool {
        self.diagonal_ok() && self.monotone_tails_ok() && self.upward_drift_ok()
    }
}

/// Checks the three structural assumptions on a transition matrix.
pub fn validate_assumptions(
    matrix: &TransitionMatrix,
    epsilon: f64,
    mode: Monotonicity,
) -> AssumptionReport {
    let n = matrix.n();
    let mut report = AssumptionReport::default();
    // `left` must not exceed `right` (strictly less in strict mode)
    let ordered = |left: f64, right: f64| match mode {
        Monotonicity::Strict => left < right,
        Monotonicity::Weak => left <= right,
    };

    for i in 0..n {
        let value = matrix.get(i, i);
        if (value - (1.0 - epsilon)).abs() > DIAGONAL_TOLERANCE {
            report.diagonal.push(AssumptionViolation::Diagonal { row: i, value });
        }
    }

    for i in 0..n {
        let row = matrix.row(i);
        if i + 1 < n {
            if !(row[i + 1] > 0.0) {
                report
                    .monotone_tails
                    .push(AssumptionViolation::NoAdjacentJump { row: i, col: i + 1 });
            }
            for j in i..n - 1 {
                if !ordered(row[j + 1], row[j]) {
                    report.monotone_tails.push(AssumptionViolation::Monotone {
                        row: i,
                        col: j,
                        left: row[j],
                        right: row[j + 1],
                    });
                }
            }
        }
        if i > 0 {
            if !(row[i - 1] > 0.0) {
                report
                    .monotone_tails
                    .push(AssumptionViolation::NoAdjacentJump { row: i, col: i - 1 });
            }
            for j in 0..i {
                if !ordered(row[j], row[j + 1]) {
                    report.monotone_tails.push(AssumptionViolation::Monotone {
                        row: i,
                        col: j,
                        left: row[j],
                        right: row[j + 1],
                    });
                }
            }
        }
    }

    for i in 1..n.saturating_sub(1) {
        let row = matrix.row(i);
        let down: f64 = row[..i].iter().sum();
        let up: f64 = row[i + 1..].iter().sum();
        if !(down < up) {
            report
                .upward_drift
                .push(AssumptionViolation::Drift { row: i, down, up });
        }
    }

    report
}
