//! Two sine sub-signals required to stay within `eps` of each other on a
//! window: the small worked example used across the test suite.

use crate::constraint::ConstraintSpec;
use crate::parse::parse_constraint;
use crate::signal::{GroupPartition, Signal};
use crate::Error;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSinesConfig {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub window: (i64, i64),
    pub horizon: (i64, i64),
}

impl Default for ExampleSinesConfig {
    fn default() -> Self {
        ExampleSinesConfig {
            a: 0.04,
            b: 1.05,
            eps: 1.0,
            window: (145, 155),
            horizon: (0, 400),
        }
    }
}

/// `x1(t) = sin(a pi t)`, `x2(t) = -b sin(1.5 a pi t)` at one step per time
/// unit, plus the closeness constraint active on the window.
pub fn build(cfg: &ExampleSinesConfig) -> Result<(Signal, ConstraintSpec, GroupPartition), Error> {
    let a = cfg.a;
    let b = cfg.b;
    let signal = Signal::from_fn(2, cfg.horizon.0, cfg.horizon.1, 1.0, move |i, t| {
        let t = t as f64;
        if i == 0 {
            (a * std::f64::consts::PI * t).sin()
        } else {
            -b * (1.5 * a * std::f64::consts::PI * t).sin()
        }
    })?;
    let constraint = parse_constraint(&format!(
        "on [{},{}]: {} - abs(x[1] - x[2])\ndefault: 1\n",
        cfg.window.0, cfg.window.1, cfg.eps
    ))?;
    Ok((signal, constraint, GroupPartition::per_component(2)))
}
