//! Built-in case-study generators.
//!
//! Three generators ship with the crate: a two-sine closeness example, a
//! three-car T-intersection with a collision-avoidance constraint, and a
//! two-robot servicing mission under an STL formula. Each produces a signal,
//! a specification, and a shift-group partition, plus a [`ProcessModel`]
//! wiring for Monte Carlo runs.
//!
//! [`ProcessModel`]: crate::stochastic::ProcessModel

pub mod example_sines;
pub mod servicing;
pub mod t_intersection;
