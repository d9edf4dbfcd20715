//! Two models of selection-driven drift in a heritable trait.
//!
//! * [`verhulst`]: a discrete logistic population split by an integer trait,
//!   with symmetric mutation among offspring and trait-dependent mortality.
//! * [`markov`]: Markov chains on ordered states whose jumps favour higher
//!   indices, with numerical and closed-form stationary distributions.
//!
//! [`experiments`] scripts the long runs and sweeps; [`cli`] wraps everything
//! in the `darwin` binary with CSV output.

// `!(x < y)` comparisons are deliberate: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod markov;
pub mod verhulst;

pub use error::{ModelError, Result};
