//! The tridiagonal drift chain and its stationary distribution in closed form.
//!
//! With down-jumps `delta * epsilon` and up-jumps `(1 - delta) * epsilon` in
//! interior rows (and all of `epsilon` pointing inward in the two boundary
//! rows), detailed balance across each cut gives the ratios
//!
//! ```text
//! pi_2     = pi_1 / delta
//! pi_{k+1} = pi_k (1 - delta) / delta      k = 2..n-2
//! pi_n     = pi_{n-1} (1 - delta)
//! ```
//!
//! which do not involve `epsilon`. As `delta -> 0` the mass collects on the
//! top two states in equal parts, so the expected state tends to
//! `(2n - 1) / 2`. At `delta = 1/2` the normalizing constant of the
//! geometric sum is `0/0`; that removable point is excluded.

use crate::error::{ModelError, Result};

use super::matrix::{ChainSpec, TransitionMatrix};
use super::stationary::{expected_state, residual, StationaryDistribution};

fn require_more_than_three(n: usize) -> Result<()> {
    if n <= 3 {
        return Err(ModelError::invalid("n", format!("{n} states; need more than 3")));
    }
    Ok(())
}

/// Tridiagonal chain with diagonal `1 - epsilon`, `p(1,2) = p(n,n-1) = epsilon`
/// and interior down/up jumps `delta * epsilon` / `(1 - delta) * epsilon`.
pub fn hessenberg_build(spec: &ChainSpec) -> Result<TransitionMatrix> {
    let n = spec.n();
    require_more_than_three(n)?;
    let eps = spec.epsilon();
    let down = spec.delta() * eps;
    let up = (1.0 - spec.delta()) * eps;
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0 - eps;
            if i == 0 {
                row[1] = eps;
            } else if i == n - 1 {
                row[n - 2] = eps;
            } else {
                row[i - 1] = down;
                row[i + 1] = up;
            }
            row
        })
        .collect();
    TransitionMatrix::from_rows(rows)
}

/// Stationary distribution of [`hessenberg_build`]`(spec)` from the ratio
/// recurrence.
///
/// The recurrence is run from the top state downward, where every ratio is
/// below one, so nothing overflows for any `n`; states far below the top may
/// underflow to zero, which is their correctly rounded mass.
pub fn hessenberg_stationary_closed(spec: &ChainSpec) -> Result<StationaryDistribution> {
    let n = spec.n();
    require_more_than_three(n)?;
    let delta = spec.delta();
    let ratio = delta / (1.0 - delta);

    let mut pi = vec![0.0; n];
    pi[n - 1] = 1.0;
    pi[n - 2] = 1.0 / (1.0 - delta);
    for k in (1..n - 2).rev() {
        pi[k] = pi[k + 1] * ratio;
    }
    pi[0] = pi[1] * delta;

    let sum: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= sum;
    }
    let residual = residual(&hessenberg_build(spec)?, &pi);
    Ok(StationaryDistribution { pi, residual })
}

/// Expected state of the tridiagonal chain's stationary distribution.
pub fn expected_state_closed(spec: &ChainSpec) -> Result<f64> {
    Ok(expected_state(&hessenberg_stationary_closed(spec)?.pi))
}

/// `(2n - 1) / 2`, the expected state in the limit `delta -> 0`.
pub fn limit_expected_state(n: usize) -> Result<f64> {
    require_more_than_three(n)?;
    Ok((2 * n - 1) as f64 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{validate_assumptions, Monotonicity};

    #[test]
    fn small_chain_entries() {
        let spec = ChainSpec::new(4, 0.1, 0.25).unwrap();
        let p = hessenberg_build(&spec).unwrap();
        assert_eq!(p.get(0, 1), 0.1);
        assert_eq!(p.get(1, 0), 0.25 * 0.1);
        assert_eq!(p.get(1, 2), 0.75 * 0.1);
        assert_eq!(p.get(3, 2), 0.1);
        assert_eq!(p.get(0, 3), 0.0);
        let report = validate_assumptions(&p, 0.1, Monotonicity::Weak);
        assert!(report.all_ok());
        let strict = validate_assumptions(&p, 0.1, Monotonicity::Strict);
        assert!(strict.diagonal_ok() && strict.upward_drift_ok());
        assert!(!strict.monotone_tails_ok());
    }

    #[test]
    fn requires_more_than_three_states() {
        let spec = ChainSpec::new(3, 0.1, 0.25).unwrap();
        assert!(hessenberg_build(&spec).is_err());
        assert!(hessenberg_stationary_closed(&spec).is_err());
        assert!(limit_expected_state(3).is_err());
    }

    #[test]
    fn four_state_distribution() {
        let spec = ChainSpec::new(4, 0.1, 0.25).unwrap();
        let dist = hessenberg_stationary_closed(&spec).unwrap();
        let expected = [1.0, 4.0, 12.0, 9.0].map(|x| x / 26.0);
        for (a, b) in dist.pi.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(dist.residual < 1e-15);
        let e = expected_state_closed(&spec).unwrap();
        assert!((e - 81.0 / 26.0).abs() < 1e-14);
    }

    #[test]
    fn limit_values() {
        assert_eq!(limit_expected_state(50).unwrap(), 49.5);
        assert_eq!(limit_expected_state(4).unwrap(), 3.5);
    }

    #[test]
    fn large_chain_does_not_overflow() {
        let spec = ChainSpec::new(2000, 0.1, 1e-6).unwrap();
        let dist = hessenberg_stationary_closed(&spec).unwrap();
        assert!(dist.pi.iter().all(|p| p.is_finite() && *p >= 0.0));
        let e = dist.expected_state();
        assert!((e - 1999.5).abs() < 1e-4);
    }
}
