//! Temporal robustness of discrete-time signals, and the risk of losing it.
//!
//! A discrete-time signal either satisfies a real-time requirement or it does
//! not; temporal robustness asks how far the signal can be shifted in time
//! before that verdict flips. This crate computes the synchronous robustness
//! (all components shifted together) and the asynchronous robustness
//! (components, or groups of components, shifted independently) of a signal
//! against two kinds of requirements:
//!
//! * a constraint function `c(x(t), t) >= 0` built from a real-valued
//!   predicate expression active on explicit time windows, and
//! * a signal temporal logic formula evaluated at a fixed time.
//!
//! On top of the deterministic notions sits a seeded Monte Carlo pipeline:
//! a process model draws random time shifts (and optional parameter noise),
//! the negated robustness of each realization becomes a cost sample, and the
//! `risk` module turns the sorted sample set into expectation, order-statistic
//! value-at-risk brackets, and a conditional value-at-risk estimate.
//!
//! The `scenario` module ships two built-in case studies (a three-car
//! T-intersection and a two-robot servicing mission) that exercise the whole
//! stack; the `temprisk` binary exposes everything on the command line.
//!
//! All core computations work in integer time steps. Conversion between
//! seconds and steps happens only at the parsing and I/O boundary.

// `!(x > 0.0)` guards reject NaN as well as nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraint;
pub mod exec;
pub mod expr;
pub mod formula;
pub mod io;
pub mod parse;
pub mod risk;
pub mod robustness;
pub mod scenario;
pub mod semantics;
pub mod signal;
pub mod stochastic;

mod error;

pub use error::Error;
pub use exec::ExecPolicy;
pub use signal::{GroupPartition, Signal};
