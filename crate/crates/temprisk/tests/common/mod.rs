//! Shared helpers for the integration suites: a small deterministic RNG and
//! generators for random signals, constraints, and formulas.

#![allow(dead_code)]

use temprisk::constraint::ConstraintSpec;
use temprisk::expr::PredicateExpr;
use temprisk::formula::{Interval, StlFormula};
use temprisk::parse::parse_constraint;
use temprisk::signal::Signal;

/// splitmix64; deterministic and independent of the crate's own RNG.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_add(0x9E3779B97F4A7C15))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi].
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
    }

    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.unit() * (hi - lo)
    }
}

/// Smooth multi-sine signal with per-component frequency and phase, sampled
/// on `[0, len-1]`.
pub fn random_signal(rng: &mut TestRng, n: usize, len: i64) -> Signal {
    let params: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.range_f64(0.02, 0.12),  // frequency
                rng.range_f64(0.0, std::f64::consts::TAU), // phase
                rng.range_f64(0.6, 1.4),    // amplitude
                rng.range_f64(-0.3, 0.3),   // offset
            )
        })
        .collect();
    Signal::from_fn(n, 0, len - 1, 1.0, move |i, t| {
        let (w, p, a, o) = params[i];
        a * (w * t as f64 + p).sin() + o
    })
    .unwrap()
}

/// Constraint active on a centered window, chosen from a few templates whose
/// thresholds give flips within small shift bounds on the signals above.
pub fn random_constraint(rng: &mut TestRng, n: usize, lo: i64, hi: i64) -> ConstraintSpec {
    let body = match (rng.next_u64() % 3, n) {
        (_, 1) => format!("{} - abs(x[1])", rng.range_f64(0.3, 1.1)),
        (0, _) => format!("{} - abs(x[1] - x[2])", rng.range_f64(0.4, 1.3)),
        (1, _) => format!("x[1] + {} - x[{}]", rng.range_f64(-0.2, 0.8), n.min(2)),
        (_, _) => format!(
            "{} - norm2(x[1], x[{}])",
            rng.range_f64(0.5, 1.6),
            n.min(2)
        ),
    };
    parse_constraint(&format!("on [{lo},{hi}]: {body}\ndefault: 1\n")).unwrap()
}

/// Random predicate over `n` components for formula generation.
fn random_pred(rng: &mut TestRng, n: usize) -> PredicateExpr {
    let i = (rng.next_u64() % n as u64) as usize;
    let c = rng.range_f64(-0.8, 0.8);
    let base = PredicateExpr::Sub(
        Box::new(PredicateExpr::Component(i)),
        Box::new(PredicateExpr::Const(c)),
    );
    if rng.next_u64().is_multiple_of(3) && n > 1 {
        let j = (rng.next_u64() % n as u64) as usize;
        PredicateExpr::Sub(
            Box::new(PredicateExpr::Const(rng.range_f64(0.2, 1.2))),
            Box::new(PredicateExpr::Abs(Box::new(PredicateExpr::Sub(
                Box::new(PredicateExpr::Component(i)),
                Box::new(PredicateExpr::Component(j)),
            )))),
        )
    } else {
        base
    }
}

fn random_interval(rng: &mut TestRng, max_hi: i64) -> Interval {
    let lo = rng.range_i64(0, max_hi / 2);
    let hi = rng.range_i64(lo, max_hi);
    Interval::steps(lo, hi).unwrap()
}

/// Random formula of bounded depth; every temporal window is at most
/// `max_window` steps.
pub fn random_formula(rng: &mut TestRng, n: usize, depth: usize, max_window: i64) -> StlFormula {
    if depth == 0 {
        return match rng.next_u64() % 5 {
            0 => StlFormula::True,
            _ => StlFormula::Pred(random_pred(rng, n)),
        };
    }
    let sub = |rng: &mut TestRng| Box::new(random_formula(rng, n, depth - 1, max_window));
    match rng.next_u64() % 10 {
        0 => StlFormula::True,
        1 => StlFormula::Pred(random_pred(rng, n)),
        2 => StlFormula::Not(sub(rng)),
        3 => StlFormula::And(sub(rng), sub(rng)),
        4 => StlFormula::Or(sub(rng), sub(rng)),
        5 => StlFormula::UntilF(random_interval(rng, max_window), sub(rng), sub(rng)),
        6 => StlFormula::UntilP(random_interval(rng, max_window), sub(rng), sub(rng)),
        7 => StlFormula::EvF(random_interval(rng, max_window), sub(rng)),
        8 => StlFormula::EvP(random_interval(rng, max_window), sub(rng)),
        _ => {
            if rng.next_u64().is_multiple_of(2) {
                StlFormula::AlwF(random_interval(rng, max_window), sub(rng))
            } else {
                StlFormula::AlwP(random_interval(rng, max_window), sub(rng))
            }
        }
    }
}
