//! Real-valued predicate expressions over signal components.
//!
//! An expression reads components through a closure, so it can be evaluated
//! against a raw sample vector, a signal at a time step, or a lazily shifted
//! view without copying anything.

use std::fmt;

/// Expression AST. Component references are stored 0-based; the concrete
/// syntax `x[i]` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum PredicateExpr {
    Const(f64),
    /// `x[i]` (0-based here).
    Component(usize),
    Neg(Box<PredicateExpr>),
    Abs(Box<PredicateExpr>),
    /// Euclidean norm of the argument list.
    Norm2(Vec<PredicateExpr>),
    Add(Box<PredicateExpr>, Box<PredicateExpr>),
    Sub(Box<PredicateExpr>, Box<PredicateExpr>),
    Mul(Box<PredicateExpr>, Box<PredicateExpr>),
    Div(Box<PredicateExpr>, Box<PredicateExpr>),
    Min(Box<PredicateExpr>, Box<PredicateExpr>),
    Max(Box<PredicateExpr>, Box<PredicateExpr>),
}

impl PredicateExpr {
    /// Evaluates with components supplied by `read`.
    pub fn eval_with(&self, read: &impl Fn(usize) -> f64) -> f64 {
        match self {
            PredicateExpr::Const(c) => *c,
            PredicateExpr::Component(i) => read(*i),
            PredicateExpr::Neg(e) => -e.eval_with(read),
            PredicateExpr::Abs(e) => e.eval_with(read).abs(),
            PredicateExpr::Norm2(es) => es
                .iter()
                .map(|e| {
                    let v = e.eval_with(read);
                    v * v
                })
                .sum::<f64>()
                .sqrt(),
            PredicateExpr::Add(a, b) => a.eval_with(read) + b.eval_with(read),
            PredicateExpr::Sub(a, b) => a.eval_with(read) - b.eval_with(read),
            PredicateExpr::Mul(a, b) => a.eval_with(read) * b.eval_with(read),
            PredicateExpr::Div(a, b) => a.eval_with(read) / b.eval_with(read),
            PredicateExpr::Min(a, b) => a.eval_with(read).min(b.eval_with(read)),
            PredicateExpr::Max(a, b) => a.eval_with(read).max(b.eval_with(read)),
        }
    }

    /// Evaluates against a plain sample vector.
    pub fn eval(&self, sample: &[f64]) -> f64 {
        self.eval_with(&|i| sample[i])
    }

    /// Largest component index referenced, if any (0-based).
    pub fn max_component(&self) -> Option<usize> {
        match self {
            PredicateExpr::Const(_) => None,
            PredicateExpr::Component(i) => Some(*i),
            PredicateExpr::Neg(e) | PredicateExpr::Abs(e) => e.max_component(),
            PredicateExpr::Norm2(es) => es.iter().filter_map(|e| e.max_component()).max(),
            PredicateExpr::Add(a, b)
            | PredicateExpr::Sub(a, b)
            | PredicateExpr::Mul(a, b)
            | PredicateExpr::Div(a, b)
            | PredicateExpr::Min(a, b)
            | PredicateExpr::Max(a, b) => a.max_component().max(b.max_component()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            PredicateExpr::Add(..) | PredicateExpr::Sub(..) => 1,
            PredicateExpr::Mul(..) | PredicateExpr::Div(..) => 2,
            PredicateExpr::Neg(..) => 3,
            _ => 4,
        }
    }

    fn fmt_child(&self, child: &PredicateExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // parenthesize when the child binds looser than the parent, and for
        // right operands of equal precedence (operators are left-associative)
        if child.precedence() < self.precedence() {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }

    fn fmt_child_right(&self, child: &PredicateExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() <= self.precedence() {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for PredicateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateExpr::Const(c) => write!(f, "{c}"),
            PredicateExpr::Component(i) => write!(f, "x[{}]", i + 1),
            PredicateExpr::Neg(e) => {
                // parenthesized so a negated literal does not fold back
                // into a signed constant when reparsed
                if matches!(**e, PredicateExpr::Const(_)) {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-")?;
                    self.fmt_child(e, f)
                }
            }
            PredicateExpr::Abs(e) => write!(f, "abs({e})"),
            PredicateExpr::Norm2(es) => {
                write!(f, "norm2(")?;
                for (k, e) in es.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            PredicateExpr::Add(a, b) => {
                self.fmt_child(a, f)?;
                write!(f, " + ")?;
                self.fmt_child_right(b, f)
            }
            PredicateExpr::Sub(a, b) => {
                self.fmt_child(a, f)?;
                write!(f, " - ")?;
                self.fmt_child_right(b, f)
            }
            PredicateExpr::Mul(a, b) => {
                self.fmt_child(a, f)?;
                write!(f, " * ")?;
                self.fmt_child_right(b, f)
            }
            PredicateExpr::Div(a, b) => {
                self.fmt_child(a, f)?;
                write!(f, " / ")?;
                self.fmt_child_right(b, f)
            }
            PredicateExpr::Min(a, b) => write!(f, "min({a}, {b})"),
            PredicateExpr::Max(a, b) => write!(f, "max({a}, {b})"),
        }
    }
}
