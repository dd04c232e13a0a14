//! Piecewise time-indexed constraint functions `c(x, t)`.
//!
//! A constraint is a list of disjoint integer intervals each carrying a
//! predicate expression, plus a constant default value outside every listed
//! interval. Satisfaction asks `c(x(t), t) >= 0` for all integer `t`; with a
//! nonnegative default that reduces to a finite scan over the listed windows.

use crate::expr::PredicateExpr;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintPiece {
    /// Closed step interval `[lo, hi]` on which `expr` is active.
    pub lo: i64,
    pub hi: i64,
    pub expr: PredicateExpr,
}

/// Time-indexed constraint: predicate pieces on disjoint windows, a constant
/// elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pieces: Vec<ConstraintPiece>,
    default: f64,
}

impl ConstraintSpec {
    /// Builds and validates: pieces well-formed and pairwise disjoint,
    /// default finite. Pieces are kept sorted by start.
    pub fn new(mut pieces: Vec<ConstraintPiece>, default: f64) -> Result<Self, Error> {
        if !default.is_finite() {
            return Err(Error::Validation(format!(
                "default constant {default} is not finite"
            )));
        }
        for p in &pieces {
            if p.lo > p.hi {
                return Err(Error::Validation(format!(
                    "constraint interval [{},{}] is reversed",
                    p.lo, p.hi
                )));
            }
        }
        pieces.sort_by_key(|p| p.lo);
        for w in pieces.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::Validation(format!(
                    "constraint intervals [{},{}] and [{},{}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(ConstraintSpec { pieces, default })
    }

    /// Constraint that is the constant `default` everywhere.
    pub fn constant(default: f64) -> Result<Self, Error> {
        ConstraintSpec::new(Vec::new(), default)
    }

    pub fn pieces(&self) -> &[ConstraintPiece] {
        &self.pieces
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    /// Largest component index referenced by any piece (0-based).
    pub fn max_component(&self) -> Option<usize> {
        self.pieces.iter().filter_map(|p| p.expr.max_component()).max()
    }

    /// Checks component references fit a signal with `n` components and that
    /// the default admits satisfaction at all (see `beta_c`).
    pub fn validate_for(&self, n: usize) -> Result<(), Error> {
        if self.default < 0.0 {
            return Err(Error::Validation(
                "constraint violated everywhere by default (default constant < 0)".into(),
            ));
        }
        if let Some(i) = self.max_component() {
            if i >= n {
                return Err(Error::Validation(format!(
                    "constraint references x[{}], signal has {n} components",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// The constraint value at time `t` for a sample read through `read`.
    pub fn value_at(&self, t: i64, read: &impl Fn(usize) -> f64) -> f64 {
        for p in &self.pieces {
            if t < p.lo {
                break;
            }
            if t <= p.hi {
                return p.expr.eval_with(read);
            }
        }
        self.default
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_predicate;

    #[test]
    fn overlap_rejected() {
        let e = parse_predicate("x[1]").unwrap();
        let pieces = vec![
            ConstraintPiece { lo: 0, hi: 5, expr: e.clone() },
            ConstraintPiece { lo: 5, hi: 9, expr: e },
        ];
        assert!(ConstraintSpec::new(pieces, 1.0).is_err());
    }

    #[test]
    fn piecewise_lookup() {
        let e = parse_predicate("x[1]").unwrap();
        let c = ConstraintSpec::new(
            vec![ConstraintPiece { lo: 2, hi: 4, expr: e }],
            7.0,
        )
        .unwrap();
        let read = |_: usize| -3.0;
        assert_eq!(c.value_at(1, &read), 7.0);
        assert_eq!(c.value_at(2, &read), -3.0);
        assert_eq!(c.value_at(4, &read), -3.0);
        assert_eq!(c.value_at(5, &read), 7.0);
    }

    #[test]
    fn negative_default_rejected_for_use() {
        let c = ConstraintSpec::constant(-1.0).unwrap();
        assert!(c.validate_for(1).is_err());
    }
}
