//! Numerical tools for long-run values of controlled ODEs under general
//! mean evaluations.
//!
//! * [`measures`]: evaluations on `ℝ₊`, shift total variation, LTC diagnostics.
//! * [`dynamics`]: controlled ODEs with piecewise-constant controls.
//! * [`values`]: evaluated costs, value functions and inequality checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod dynamics;
pub mod measures;
pub mod quad;
pub mod values;

pub use error::{Error, Result};
pub use exec::Execution;
pub use dynamics::{ControlSignal, ControlSystem, State};
pub use measures::Evaluation;
pub use values::ValueEstimate;
