use crate::error::{ModelError, Result};

use super::matrix::TransitionMatrix;

pub const DEFAULT_POWER_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000_000;

/// Pivots smaller than this in absolute value make the direct solve fail.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// A probability row vector `pi` with `pi * P = pi`, and the achieved
/// residual `||pi * P - pi||_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub residual: f64,
}

impl StationaryDistribution {
    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn expected_state(&self) -> f64 {
        expected_state(&self.pi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tolerance: DEFAULT_POWER_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// `||pi * P - pi||_1`.
pub fn residual(matrix: &TransitionMatrix, pi: &[f64]) -> f64 {
    matrix
        .left_multiply(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .sum()
}

fn normalize(pi: &mut [f64]) {
    let sum: f64 = pi.iter().sum();
    for p in pi.iter_mut() {
        *p /= sum;
    }
}

/// Power iteration `pi <- pi * P` from the uniform distribution, stopping
/// once `||pi * P - pi||_1 < tolerance`.
pub fn stationary_power(
    matrix: &TransitionMatrix,
    options: PowerOptions,
) -> Result<StationaryDistribution> {
    let n = matrix.n();
    let mut pi = vec![1.0 / n as f64; n];
    let mut last = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let mut next = matrix.left_multiply(&pi);
        let step: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        if step < options.tolerance {
            normalize(&mut pi);
            let residual = residual(matrix, &pi);
            return Ok(StationaryDistribution { pi, residual });
        }
        // drift in total mass is pure round-off
        normalize(&mut next);
        pi = next;
        last = step;
    }
    Err(ModelError::NotConverged {
        iterations: options.max_iterations,
        residual: last,
    })
}

/// Solves `pi (P - I) = 0`, `sum pi = 1` by Gaussian elimination with
/// partial pivoting.
///
/// The system is the transpose `(P - I)^T pi^T = 0`; its last equation is
/// redundant for an irreducible chain and is replaced by the normalization
/// row of ones.
pub fn stationary_direct(matrix: &TransitionMatrix) -> Result<StationaryDistribution> {
    let n = matrix.n();
    // a[r][c] = (P - I)^T, row-major
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let identity = if i == j { 1.0 } else { 0.0 };
            a[j * n + i] = matrix.get(i, j) - identity;
        }
    }
    a[(n - 1) * n..].fill(1.0);
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .expect("non-empty range");
        let pivot = a[pivot_row * n + col];
        if pivot.abs() < PIVOT_TOLERANCE {
            return Err(ModelError::Singular { index: col, pivot: pivot.abs() });
        }
        if pivot_row != col {
            for c in 0..n {
                a.swap(col * n + c, pivot_row * n + c);
            }
            rhs.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    let mut pi = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| a[r * n + c] * pi[c]).sum();
        pi[r] = (rhs[r] - tail) / a[r * n + r];
    }
    // tiny negative entries are round-off on states of negligible mass
    for p in &mut pi {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    normalize(&mut pi);
    let residual = residual(matrix, &pi);
    Ok(StationaryDistribution { pi, residual })
}

/// `sum_k k * pi_k` with 1-based states; lies in `[1, n]`.
pub fn expected_state(pi: &[f64]) -> f64 {
    pi.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum()
}
