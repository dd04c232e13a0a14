//! Boolean satisfaction of constraints and STL formulas.
//!
//! Everything here returns a [`Sign`]: `+1` for satisfaction, `-1` for
//! violation. Constraint satisfaction requires `c(x(t), t) >= 0` at every
//! step of the constraint's listed windows (the default region is constant
//! and checked once). STL satisfaction follows the classic inductive
//! semantics with until and past-until over bounded step intervals.

use crate::constraint::ConstraintSpec;
use crate::formula::{Interval, StlFormula};
use crate::signal::{Signal, View};
use crate::Error;
use serde::{Deserialize, Serialize};

/// Two-valued verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    #[inline]
    pub fn from_bool(sat: bool) -> Sign {
        if sat {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    /// `+1` or `-1`.
    #[inline]
    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// Constraint satisfaction of a (possibly shifted) signal view.
///
/// The constraint must already be validated (`validate_for`): in particular
/// its default is nonnegative, so only the listed windows need scanning.
/// A non-finite predicate value counts as a violation.
pub fn beta_c_view(v: View<'_>, c: &ConstraintSpec) -> Sign {
    for p in c.pieces() {
        for t in p.lo..=p.hi {
            if !(p.expr.eval_with(&|i| v.value(i, t)) >= 0.0) {
                return Sign::Neg;
            }
        }
    }
    Sign::Pos
}

/// Constraint satisfaction of a signal.
pub fn beta_c(s: &Signal, c: &ConstraintSpec) -> Result<Sign, Error> {
    c.validate_for(s.n())?;
    Ok(beta_c_view(View::unshifted(s), c))
}

/// Minimum constraint value over time: the listed windows scanned pointwise,
/// combined with the default constant.
pub fn spatial_robustness(s: &Signal, c: &ConstraintSpec) -> Result<f64, Error> {
    c.validate_for(s.n())?;
    let v = View::unshifted(s);
    let mut lo = c.default_value();
    for p in c.pieces() {
        for t in p.lo..=p.hi {
            lo = lo.min(p.expr.eval_with(&|i| v.value(i, t)));
        }
    }
    Ok(lo)
}

// Flattened formula arena used by the memoizing evaluator.
enum NodeKind<'f> {
    True,
    Pred(&'f crate::expr::PredicateExpr),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    UntilF(&'f Interval, usize, usize),
    UntilP(&'f Interval, usize, usize),
    EvF(&'f Interval, usize),
    EvP(&'f Interval, usize),
    AlwF(&'f Interval, usize),
    AlwP(&'f Interval, usize),
}

pub(crate) struct FormulaIndex<'f> {
    nodes: Vec<NodeKind<'f>>,
    root: usize,
    past: i64,
    fut: i64,
}

impl<'f> FormulaIndex<'f> {
    pub(crate) fn new(f: &'f StlFormula) -> Self {
        fn go<'f>(f: &'f StlFormula, nodes: &mut Vec<NodeKind<'f>>) -> usize {
            let kind = match f {
                StlFormula::True => NodeKind::True,
                StlFormula::Pred(e) => NodeKind::Pred(e),
                StlFormula::Not(p) => NodeKind::Not(go(p, nodes)),
                StlFormula::And(a, b) => {
                    let ia = go(a, nodes);
                    let ib = go(b, nodes);
                    NodeKind::And(ia, ib)
                }
                StlFormula::Or(a, b) => {
                    let ia = go(a, nodes);
                    let ib = go(b, nodes);
                    NodeKind::Or(ia, ib)
                }
                StlFormula::UntilF(i, a, b) => {
                    let ia = go(a, nodes);
                    let ib = go(b, nodes);
                    NodeKind::UntilF(i, ia, ib)
                }
                StlFormula::UntilP(i, a, b) => {
                    let ia = go(a, nodes);
                    let ib = go(b, nodes);
                    NodeKind::UntilP(i, ia, ib)
                }
                StlFormula::EvF(i, p) => NodeKind::EvF(i, go(p, nodes)),
                StlFormula::EvP(i, p) => NodeKind::EvP(i, go(p, nodes)),
                StlFormula::AlwF(i, p) => NodeKind::AlwF(i, go(p, nodes)),
                StlFormula::AlwP(i, p) => NodeKind::AlwP(i, go(p, nodes)),
            };
            nodes.push(kind);
            nodes.len() - 1
        }
        let mut nodes = Vec::with_capacity(f.node_count());
        let root = go(f, &mut nodes);
        FormulaIndex {
            nodes,
            root,
            past: f.past_extent(),
            fut: f.future_extent(),
        }
    }

    /// Verdict at time `t0`, memoizing subformula verdicts across the
    /// evaluation window. The memo is local to this call, so concurrent
    /// evaluations never share state.
    pub(crate) fn eval(&self, v: View<'_>, t0: i64) -> Sign {
        let lo = t0 - self.past;
        let width = (self.past + self.fut + 1) as usize;
        let mut memo = vec![0u8; self.nodes.len() * width];
        self.eval_node(self.root, t0, v, lo, width, &mut memo)
    }

    fn eval_node(
        &self,
        id: usize,
        t: i64,
        v: View<'_>,
        lo: i64,
        width: usize,
        memo: &mut Vec<u8>,
    ) -> Sign {
        let slot = id * width + (t - lo) as usize;
        match memo[slot] {
            1 => return Sign::Pos,
            2 => return Sign::Neg,
            _ => {}
        }
        let sign = match &self.nodes[id] {
            NodeKind::True => Sign::Pos,
            NodeKind::Pred(e) => Sign::from_bool(e.eval_with(&|i| v.value(i, t)) >= 0.0),
            NodeKind::Not(p) => self.eval_node(*p, t, v, lo, width, memo).flip(),
            NodeKind::And(a, b) => {
                if self.eval_node(*a, t, v, lo, width, memo) == Sign::Neg {
                    Sign::Neg
                } else {
                    self.eval_node(*b, t, v, lo, width, memo)
                }
            }
            NodeKind::Or(a, b) => {
                if self.eval_node(*a, t, v, lo, width, memo) == Sign::Pos {
                    Sign::Pos
                } else {
                    self.eval_node(*b, t, v, lo, width, memo)
                }
            }
            NodeKind::UntilF(i, a, b) => {
                // sup over t2 in [t+lo, t+hi] of min(b(t2), inf over [t, t2] of a)
                let mut sat = false;
                let mut a_holds = true;
                let mut next_a = t;
                'outer: for t2 in t + i.lo..=t + i.hi {
                    while next_a <= t2 {
                        if self.eval_node(*a, next_a, v, lo, width, memo) == Sign::Neg {
                            a_holds = false;
                            break;
                        }
                        next_a += 1;
                    }
                    if !a_holds {
                        break 'outer;
                    }
                    if self.eval_node(*b, t2, v, lo, width, memo) == Sign::Pos {
                        sat = true;
                        break 'outer;
                    }
                }
                Sign::from_bool(sat)
            }
            NodeKind::UntilP(i, a, b) => {
                // sup over t2 in [t-hi, t-lo] of min(b(t2), inf over [t2, t] of a)
                let mut sat = false;
                let mut a_holds = true;
                let mut next_a = t;
                'outer: for t2 in (t - i.hi..=t - i.lo).rev() {
                    while next_a >= t2 {
                        if self.eval_node(*a, next_a, v, lo, width, memo) == Sign::Neg {
                            a_holds = false;
                            break;
                        }
                        next_a -= 1;
                    }
                    if !a_holds {
                        break 'outer;
                    }
                    if self.eval_node(*b, t2, v, lo, width, memo) == Sign::Pos {
                        sat = true;
                        break 'outer;
                    }
                }
                Sign::from_bool(sat)
            }
            NodeKind::EvF(i, p) => Sign::from_bool(
                (t + i.lo..=t + i.hi).any(|t2| self.eval_node(*p, t2, v, lo, width, memo) == Sign::Pos),
            ),
            NodeKind::EvP(i, p) => Sign::from_bool(
                (t - i.hi..=t - i.lo).any(|t2| self.eval_node(*p, t2, v, lo, width, memo) == Sign::Pos),
            ),
            NodeKind::AlwF(i, p) => Sign::from_bool(
                (t + i.lo..=t + i.hi).all(|t2| self.eval_node(*p, t2, v, lo, width, memo) == Sign::Pos),
            ),
            NodeKind::AlwP(i, p) => Sign::from_bool(
                (t - i.hi..=t - i.lo).all(|t2| self.eval_node(*p, t2, v, lo, width, memo) == Sign::Pos),
            ),
        };
        memo[slot] = if sign == Sign::Pos { 1 } else { 2 };
        sign
    }
}

/// STL satisfaction of a (possibly shifted) signal view at time `t`.
/// The formula must already be validated against the signal dimension.
pub fn beta_phi_view(v: View<'_>, phi: &StlFormula, t: i64) -> Sign {
    FormulaIndex::new(phi).eval(v, t)
}

/// STL satisfaction of a signal at time `t`.
pub fn beta_phi(s: &Signal, phi: &StlFormula, t: i64) -> Result<Sign, Error> {
    phi.validate(s.n())?;
    Ok(beta_phi_view(View::unshifted(s), phi, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_constraint, parse_formula, parse_predicate};
    use crate::constraint::ConstraintPiece;

    fn constant_signal(v: f64, len: i64) -> Signal {
        Signal::from_fn(1, 0, len - 1, 1.0, |_, _| v).unwrap()
    }

    #[test]
    fn beta_c_constant_violation() {
        let s = constant_signal(0.0, 11);
        let c = ConstraintSpec::new(
            vec![ConstraintPiece {
                lo: 0,
                hi: 10,
                expr: parse_predicate("x[1] - 1").unwrap(),
            }],
            1.0,
        )
        .unwrap();
        assert_eq!(beta_c(&s, &c).unwrap(), Sign::Neg);
    }

    #[test]
    fn beta_c_vacuous_default() {
        let s = constant_signal(0.0, 5);
        let c = ConstraintSpec::constant(1.0).unwrap();
        assert_eq!(beta_c(&s, &c).unwrap(), Sign::Pos);
    }

    #[test]
    fn beta_c_rejects_negative_default() {
        let s = constant_signal(0.0, 5);
        let c = ConstraintSpec::constant(-0.5).unwrap();
        assert!(beta_c(&s, &c).is_err());
    }

    #[test]
    fn spatial_includes_default() {
        let s = constant_signal(3.0, 6);
        let c = parse_constraint("on [0,5]: x[1]\ndefault: 1\n").unwrap();
        assert_eq!(spatial_robustness(&s, &c).unwrap(), 1.0);
    }

    #[test]
    fn beta_c_sign_matches_spatial_sign() {
        let s = Signal::from_fn(2, 0, 60, 1.0, |i, t| {
            let t = t as f64;
            if i == 0 {
                (0.3 * t).sin()
            } else {
                (0.21 * t).cos()
            }
        })
        .unwrap();
        for thr in [-2.0f64, -0.5, 0.0, 0.4, 0.9] {
            let c = parse_constraint(&format!("on [5,55]: x[1] - x[2] - {thr}\ndefault: 0\n")).unwrap();
            let b = beta_c(&s, &c).unwrap();
            let rho = spatial_robustness(&s, &c).unwrap();
            assert_eq!(b == Sign::Pos, rho >= 0.0, "thr={thr} rho={rho}");
        }
    }

    #[test]
    fn beta_phi_true_and_pred() {
        let s = constant_signal(2.0, 5);
        let t = parse_formula("TRUE", 1.0).unwrap();
        assert_eq!(beta_phi(&s, &t, 0).unwrap(), Sign::Pos);
        let p = parse_formula("pred{x[1] - 3}", 1.0).unwrap();
        assert_eq!(beta_phi(&s, &p, 2).unwrap(), Sign::Neg);
    }

    #[test]
    fn eventually_vs_always_on_single_entry() {
        // component steps into the region exactly once inside the window
        let s = Signal::from_fn(1, 0, 20, 1.0, |_, t| if t == 7 { 1.0 } else { -1.0 }).unwrap();
        let f = parse_formula("F[0,10] pred{x[1]}", 1.0).unwrap();
        let g = parse_formula("G[0,10] pred{x[1]}", 1.0).unwrap();
        assert_eq!(beta_phi(&s, &f, 0).unwrap(), Sign::Pos);
        assert_eq!(beta_phi(&s, &g, 0).unwrap(), Sign::Neg);
    }

    #[test]
    fn until_requires_continuous_lhs() {
        // lhs holds on [0,4] then fails at 5; rhs first holds at 6
        let s = Signal::from_fn(2, 0, 10, 1.0, |i, t| match i {
            0 => {
                if t <= 4 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => {
                if t >= 6 {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .unwrap();
        let f = parse_formula("pred{x[1]} U[0,8] pred{x[2]}", 1.0).unwrap();
        assert_eq!(beta_phi(&s, &f, 0).unwrap(), Sign::Neg);
        // rhs holding at 4 instead makes it satisfiable
        let s2 = Signal::from_fn(2, 0, 10, 1.0, |i, t| match i {
            0 => {
                if t <= 4 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => {
                if t == 4 {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .unwrap();
        assert_eq!(beta_phi(&s2, &f, 0).unwrap(), Sign::Pos);
    }

    #[test]
    fn past_until_mirrors_future() {
        let s = Signal::from_fn(2, 0, 10, 1.0, |i, t| match i {
            0 => {
                if t >= 6 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => {
                if t == 6 {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .unwrap();
        let f = parse_formula("pred{x[1]} S[0,8] pred{x[2]}", 1.0).unwrap();
        assert_eq!(beta_phi(&s, &f, 10).unwrap(), Sign::Pos);
        assert_eq!(beta_phi(&s, &f, 4).unwrap(), Sign::Neg);
    }

    #[test]
    fn formula_validation_catches_bad_component() {
        let s = constant_signal(0.0, 5);
        let f = parse_formula("pred{x[3]}", 1.0).unwrap();
        assert!(beta_phi(&s, &f, 0).is_err());
    }
}
