//! Signal temporal logic formula ASTs.
//!
//! Intervals are stored in integer steps (converted from time units at parse
//! time) together with the original unit bounds so that formulas print back
//! in the units they were written in. `Or`, the eventually operators, and the
//! always operators are kept as distinct nodes; the Boolean semantics treats
//! them through the usual identities.

use crate::expr::PredicateExpr;
use crate::Error;
use std::fmt;

/// Closed interval in steps, tagged with the unit bounds it was written as.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
    /// Bounds as written (time units), kept for printing.
    pub lo_units: f64,
    pub hi_units: f64,
}

impl Interval {
    /// Interval already in steps.
    pub fn steps(lo: i64, hi: i64) -> Result<Self, Error> {
        if lo < 0 || hi < 0 {
            return Err(Error::Validation(format!(
                "interval [{lo},{hi}] has a negative bound"
            )));
        }
        if lo > hi {
            return Err(Error::Validation(format!("reversed interval [{lo},{hi}]")));
        }
        Ok(Interval {
            lo,
            hi,
            lo_units: lo as f64,
            hi_units: hi as f64,
        })
    }

    /// Converts unit bounds to steps, rounding half away from zero.
    pub fn from_units(lo: f64, hi: f64, dt: f64) -> Result<Self, Error> {
        if !(dt > 0.0) {
            return Err(Error::Validation(format!("dt must be positive, got {dt}")));
        }
        if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi < 0.0 {
            return Err(Error::Validation(format!(
                "interval [{lo},{hi}] has a negative or non-finite bound"
            )));
        }
        if lo > hi {
            return Err(Error::Validation(format!("reversed interval [{lo},{hi}]")));
        }
        let lo_steps = (lo / dt).round() as i64;
        let hi_steps = (hi / dt).round() as i64;
        Ok(Interval {
            lo: lo_steps,
            hi: hi_steps,
            lo_units: lo,
            hi_units: hi,
        })
    }
}

/// STL formula AST.
#[derive(Debug, Clone, PartialEq)]
pub enum StlFormula {
    True,
    Pred(PredicateExpr),
    Not(Box<StlFormula>),
    And(Box<StlFormula>, Box<StlFormula>),
    Or(Box<StlFormula>, Box<StlFormula>),
    /// Future until: `lhs U[I] rhs`.
    UntilF(Interval, Box<StlFormula>, Box<StlFormula>),
    /// Past until: `lhs S[I] rhs`.
    UntilP(Interval, Box<StlFormula>, Box<StlFormula>),
    /// Future eventually `F[I]`.
    EvF(Interval, Box<StlFormula>),
    /// Past eventually `P[I]`.
    EvP(Interval, Box<StlFormula>),
    /// Future always `G[I]`.
    AlwF(Interval, Box<StlFormula>),
    /// Past always `H[I]`.
    AlwP(Interval, Box<StlFormula>),
}

impl StlFormula {
    /// How far into the future evaluation at `t` can probe, in steps.
    pub fn future_extent(&self) -> i64 {
        match self {
            StlFormula::True | StlFormula::Pred(_) => 0,
            StlFormula::Not(p) => p.future_extent(),
            StlFormula::And(a, b) | StlFormula::Or(a, b) => {
                a.future_extent().max(b.future_extent())
            }
            StlFormula::UntilF(i, a, b) => i.hi + a.future_extent().max(b.future_extent()),
            StlFormula::UntilP(_, a, b) => a.future_extent().max(b.future_extent()),
            StlFormula::EvF(i, p) | StlFormula::AlwF(i, p) => i.hi + p.future_extent(),
            StlFormula::EvP(_, p) | StlFormula::AlwP(_, p) => p.future_extent(),
        }
    }

    /// How far into the past evaluation at `t` can probe, in steps.
    pub fn past_extent(&self) -> i64 {
        match self {
            StlFormula::True | StlFormula::Pred(_) => 0,
            StlFormula::Not(p) => p.past_extent(),
            StlFormula::And(a, b) | StlFormula::Or(a, b) => a.past_extent().max(b.past_extent()),
            StlFormula::UntilF(_, a, b) => a.past_extent().max(b.past_extent()),
            StlFormula::UntilP(i, a, b) => i.hi + a.past_extent().max(b.past_extent()),
            StlFormula::EvF(_, p) | StlFormula::AlwF(_, p) => p.past_extent(),
            StlFormula::EvP(i, p) | StlFormula::AlwP(i, p) => i.hi + p.past_extent(),
        }
    }

    /// Number of AST nodes.
    pub fn node_count(&self) -> usize {
        match self {
            StlFormula::True | StlFormula::Pred(_) => 1,
            StlFormula::Not(p)
            | StlFormula::EvF(_, p)
            | StlFormula::EvP(_, p)
            | StlFormula::AlwF(_, p)
            | StlFormula::AlwP(_, p) => 1 + p.node_count(),
            StlFormula::And(a, b) | StlFormula::Or(a, b) => 1 + a.node_count() + b.node_count(),
            StlFormula::UntilF(_, a, b) | StlFormula::UntilP(_, a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// Largest component index referenced by any predicate (0-based).
    pub fn max_component(&self) -> Option<usize> {
        match self {
            StlFormula::True => None,
            StlFormula::Pred(e) => e.max_component(),
            StlFormula::Not(p)
            | StlFormula::EvF(_, p)
            | StlFormula::EvP(_, p)
            | StlFormula::AlwF(_, p)
            | StlFormula::AlwP(_, p) => p.max_component(),
            StlFormula::And(a, b)
            | StlFormula::Or(a, b)
            | StlFormula::UntilF(_, a, b)
            | StlFormula::UntilP(_, a, b) => a.max_component().max(b.max_component()),
        }
    }

    /// Checks the formula fits a signal with `n` components and that its
    /// evaluation window is bounded enough to scan.
    pub fn validate(&self, n: usize) -> Result<(), Error> {
        if let Some(i) = self.max_component() {
            if i >= n {
                return Err(Error::Validation(format!(
                    "formula references x[{}], signal has {n} components",
                    i + 1
                )));
            }
        }
        const MAX_EXTENT: i64 = 1_000_000;
        let ext = self.future_extent().max(self.past_extent());
        if ext > MAX_EXTENT {
            return Err(Error::Validation(format!(
                "formula evaluation window spans {ext} steps, limit is {MAX_EXTENT}"
            )));
        }
        Ok(())
    }

    fn precedence(&self) -> u8 {
        match self {
            StlFormula::Or(..) => 1,
            StlFormula::And(..) => 2,
            StlFormula::UntilF(..) | StlFormula::UntilP(..) => 3,
            _ => 4,
        }
    }
}

fn fmt_interval(i: &Interval, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "[{},{}]", i.lo_units, i.hi_units)
}

impl fmt::Display for StlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |c: &StlFormula, f: &mut fmt::Formatter<'_>, tighter: bool| -> fmt::Result {
            let need = if tighter {
                c.precedence() <= self.precedence()
            } else {
                c.precedence() < self.precedence()
            };
            if need {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        };
        match self {
            StlFormula::True => write!(f, "TRUE"),
            StlFormula::Pred(e) => write!(f, "pred{{{e}}}"),
            StlFormula::Not(p) => {
                write!(f, "!")?;
                if p.precedence() < 4 {
                    write!(f, "({p})")
                } else {
                    write!(f, "{p}")
                }
            }
            StlFormula::And(a, b) => {
                child(a, f, false)?;
                write!(f, " & ")?;
                child(b, f, true)
            }
            StlFormula::Or(a, b) => {
                child(a, f, false)?;
                write!(f, " | ")?;
                child(b, f, true)
            }
            StlFormula::UntilF(i, a, b) => {
                child(a, f, true)?;
                write!(f, " U")?;
                fmt_interval(i, f)?;
                write!(f, " ")?;
                child(b, f, true)
            }
            StlFormula::UntilP(i, a, b) => {
                child(a, f, true)?;
                write!(f, " S")?;
                fmt_interval(i, f)?;
                write!(f, " ")?;
                child(b, f, true)
            }
            StlFormula::EvF(i, p) => {
                write!(f, "F")?;
                fmt_interval(i, f)?;
                write!(f, " ")?;
                if p.precedence() < 4 {
                    write!(f, "({p})")
                } else {
                    write!(f, "{p}")
                }
            }
            StlFormula::EvP(i, p) => {
                write!(f, "P")?;
                fmt_interval(i, f)?;
                write!(f, " ")?;
                if p.precedence() < 4 {
                    write!(f, "({p})")
                } else {
                    write!(f, "{p}")
                }
            }
            StlFormula::AlwF(i, p) => {
                write!(f, "G")?;
                fmt_interval(i, f)?;
                write!(f, " ")?;
                if p.precedence() < 4 {
                    write!(f, "({p})")
                } else {
                    write!(f, "{p}")
                }
            }
            StlFormula::AlwP(i, p) => {
                write!(f, "H")?;
                fmt_interval(i, f)?;
                write!(f, " ")?;
                if p.precedence() < 4 {
                    write!(f, "({p})")
                } else {
                    write!(f, "{p}")
                }
            }
        }
    }
}
