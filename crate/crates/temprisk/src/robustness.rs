//! Synchronous and asynchronous temporal robustness.
//!
//! Both notions ask for the largest shift magnitude `tau` such that every
//! time shift bounded by `tau` leaves the satisfaction verdict unchanged:
//! synchronously, one shift applied to all components; asynchronously, an
//! independent shift per component group. The search is capped at a bound
//! `r`; when no verdict flip exists within the cap, the result saturates
//! (standing in for an unbounded robustness).
//!
//! The asynchronous search enumerates shift tuples shell by shell in the
//! max-norm, so it terminates at the first shell containing a flip and only
//! degenerates to the full `(2r+1)^m` box when the result saturates.
//! [`theta_bruteforce`] enumerates that box outright over materialized
//! shifted signals and serves as the oracle for the optimized scan.

use crate::constraint::ConstraintSpec;
use crate::exec::ExecPolicy;
use crate::formula::StlFormula;
use crate::semantics::{beta_c_view, FormulaIndex, Sign};
use crate::signal::{GroupPartition, Signal, View};
use crate::Error;
use serde::Serialize;
use std::sync::atomic::{AtomicU64, Ordering};

/// Signed, saturating robustness magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RobustnessValue {
    pub sign: Sign,
    /// In `[0, r]`; equals `r` when saturated.
    pub magnitude: i64,
    /// True when no verdict flip exists within the bound `r`.
    pub saturated: bool,
}

impl RobustnessValue {
    pub fn signed(&self) -> i64 {
        self.sign.value() * self.magnitude
    }
}

/// Pure sign evaluator over (possibly shifted) signal views.
///
/// Implementations must be deterministic: the same view always yields the
/// same verdict. When a checker will be asked about many shifted views of
/// one signal (the shift scans below), [`Checker::for_signal`] lets it do
/// per-signal precomputation once; the default just forwards to
/// [`Checker::verdict`].
pub trait Checker: Sync {
    fn verdict(&self, v: View<'_>) -> Sign;

    fn for_signal<'a>(&'a self, s: &'a Signal) -> Box<dyn ShiftVerdict + 'a> {
        Box::new(Forwarder { checker: self, s })
    }
}

/// Verdicts of per-component shifts of one fixed signal.
pub trait ShiftVerdict: Sync {
    /// Verdict of the signal shifted by `kappa` (length `n`); must agree
    /// with `checker.verdict(View::shifted(signal, kappa))`.
    fn verdict_shifted(&self, kappa: &[i64]) -> Sign;
}

struct Forwarder<'a, C: Checker + ?Sized> {
    checker: &'a C,
    s: &'a Signal,
}

impl<C: Checker + ?Sized> ShiftVerdict for Forwarder<'_, C> {
    fn verdict_shifted(&self, kappa: &[i64]) -> Sign {
        self.checker.verdict(View::shifted(self.s, kappa))
    }
}

/// Constraint-function checker.
pub struct ConstraintChecker {
    spec: ConstraintSpec,
}

impl ConstraintChecker {
    pub fn new(spec: ConstraintSpec, n: usize) -> Result<Self, Error> {
        spec.validate_for(n)?;
        Ok(ConstraintChecker { spec })
    }

    pub fn spec(&self) -> &ConstraintSpec {
        &self.spec
    }
}

impl Checker for ConstraintChecker {
    fn verdict(&self, v: View<'_>) -> Sign {
        beta_c_view(v, &self.spec)
    }
}

/// STL-formula-at-time checker.
pub struct StlChecker {
    formula: StlFormula,
    t: i64,
}

impl StlChecker {
    pub fn new(formula: StlFormula, n: usize, t: i64) -> Result<Self, Error> {
        formula.validate(n)?;
        Ok(StlChecker { formula, t })
    }
}

impl Checker for StlChecker {
    fn verdict(&self, v: View<'_>) -> Sign {
        FormulaIndex::new(&self.formula).eval(v, self.t)
    }

    fn for_signal<'a>(&'a self, s: &'a Signal) -> Box<dyn ShiftVerdict + 'a> {
        Box::new(StlPrepared {
            index: FormulaIndex::new(&self.formula),
            s,
            t: self.t,
        })
    }
}

struct StlPrepared<'a> {
    index: FormulaIndex<'a>,
    s: &'a Signal,
    t: i64,
}

impl ShiftVerdict for StlPrepared<'_> {
    fn verdict_shifted(&self, kappa: &[i64]) -> Sign {
        self.index.eval(View::shifted(self.s, kappa), self.t)
    }
}

/// Checker decorator counting verdict evaluations.
pub struct CountingChecker<'a> {
    inner: &'a dyn Checker,
    calls: AtomicU64,
}

impl<'a> CountingChecker<'a> {
    pub fn new(inner: &'a dyn Checker) -> Self {
        CountingChecker {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Checker for CountingChecker<'_> {
    fn verdict(&self, v: View<'_>) -> Sign {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.verdict(v)
    }

    fn for_signal<'a>(&'a self, s: &'a Signal) -> Box<dyn ShiftVerdict + 'a> {
        Box::new(CountingShiftVerdict {
            inner: self.inner.for_signal(s),
            calls: &self.calls,
        })
    }
}

struct CountingShiftVerdict<'a> {
    inner: Box<dyn ShiftVerdict + 'a>,
    calls: &'a AtomicU64,
}

impl ShiftVerdict for CountingShiftVerdict<'_> {
    fn verdict_shifted(&self, kappa: &[i64]) -> Sign {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.verdict_shifted(kappa)
    }
}

/// Synchronous temporal robustness with bound `r`.
///
/// Scans shifts `±1, ±2, ..` until the verdict flips; at most `2r + 1`
/// checker calls.
pub fn eta(s: &Signal, k: &dyn Checker, r: i64) -> Result<RobustnessValue, Error> {
    if r < 0 {
        return Err(Error::Validation(format!("bound r must be >= 0, got {r}")));
    }
    let prepared = k.for_signal(s);
    let mut shifts = vec![0i64; s.n()];
    let base = prepared.verdict_shifted(&shifts);
    for tau in 1..=r {
        for kappa in [tau, -tau] {
            shifts.iter_mut().for_each(|x| *x = kappa);
            if prepared.verdict_shifted(&shifts) != base {
                return Ok(RobustnessValue {
                    sign: base,
                    magnitude: tau - 1,
                    saturated: false,
                });
            }
        }
    }
    Ok(RobustnessValue {
        sign: base,
        magnitude: r,
        saturated: true,
    })
}

/// Enumerates group-shift tuples `g` with `max |g_j| == tau` (the shell) and
/// reports whether any of them flips the verdict. The tuples are streamed
/// per `g_0` stratum so memory stays `O(m)`.
fn shell_has_flip(
    n: usize,
    prepared: &dyn ShiftVerdict,
    comp_group: &[usize],
    group_count: usize,
    tau: i64,
    base: Sign,
    policy: ExecPolicy,
) -> Result<bool, Error> {
    let m = group_count;
    let strata: Vec<i64> = (-tau..=tau).collect();
    let check_stratum = |&g0: &i64| -> Result<bool, Error> {
        let mut g = vec![0i64; m];
        g[0] = g0;
        let mut kappa = vec![0i64; n];
        let need_extreme = g0.abs() != tau;
        let check = |g: &[i64], kappa: &mut [i64]| {
            for (x, &grp) in kappa.iter_mut().zip(comp_group) {
                *x = g[grp];
            }
            prepared.verdict_shifted(kappa) != base
        };
        if m == 1 {
            if need_extreme {
                return Ok(false);
            }
            return Ok(check(&g, &mut kappa));
        }
        // odometer over the remaining m-1 coordinates; when the first
        // coordinate is interior, at least one remaining coordinate must
        // sit at ±tau for the tuple to belong to the shell
        let rest = m - 1;
        let mut idx = vec![-tau; rest];
        loop {
            let on_shell = !need_extreme || idx.iter().any(|&x| x.abs() == tau);
            if on_shell {
                g[1..].copy_from_slice(&idx);
                if check(&g, &mut kappa) {
                    return Ok(true);
                }
            }
            // advance odometer
            let mut pos = rest;
            loop {
                if pos == 0 {
                    return Ok(false);
                }
                pos -= 1;
                if idx[pos] < tau {
                    idx[pos] += 1;
                    for x in &mut idx[pos + 1..] {
                        *x = -tau;
                    }
                    break;
                }
            }
        }
    };
    crate::exec::try_any(&strata, check_stratum, policy)
}

/// Asynchronous (grouped) temporal robustness with bound `r`.
///
/// With the per-component partition this is the fully asynchronous notion;
/// with a single group it coincides with [`eta`].
pub fn theta(
    s: &Signal,
    k: &dyn Checker,
    r: i64,
    partition: &GroupPartition,
    policy: ExecPolicy,
) -> Result<RobustnessValue, Error> {
    if r < 0 {
        return Err(Error::Validation(format!("bound r must be >= 0, got {r}")));
    }
    let comp_group = partition.component_map(s.n())?;
    let prepared = k.for_signal(s);
    let base = prepared.verdict_shifted(&vec![0i64; s.n()]);
    for tau in 1..=r {
        if shell_has_flip(
            s.n(),
            prepared.as_ref(),
            &comp_group,
            partition.group_count(),
            tau,
            base,
            policy,
        )? {
            return Ok(RobustnessValue {
                sign: base,
                magnitude: tau - 1,
                saturated: false,
            });
        }
    }
    Ok(RobustnessValue {
        sign: base,
        magnitude: r,
        saturated: true,
    })
}

/// Evaluation cap for [`theta_bruteforce`].
pub const BRUTEFORCE_GUARD: u128 = 1_000_000;

/// Full-box oracle for [`theta`]: evaluates the verdict of every group shift
/// in `[-r, r]^m` on a materialized shifted signal and takes the smallest
/// flipping max-norm. Guarded to [`BRUTEFORCE_GUARD`] evaluations.
pub fn theta_bruteforce(
    s: &Signal,
    k: &dyn Checker,
    r: i64,
    partition: &GroupPartition,
) -> Result<RobustnessValue, Error> {
    if r < 0 {
        return Err(Error::Validation(format!("bound r must be >= 0, got {r}")));
    }
    let m = partition.group_count();
    let total = (2u128 * r as u128 + 1).pow(m as u32);
    if total > BRUTEFORCE_GUARD {
        return Err(Error::Resource(format!(
            "brute force would evaluate {total} shifted signals (guard {BRUTEFORCE_GUARD})"
        )));
    }
    let base = k.verdict(View::unshifted(s));
    let mut g = vec![-r; m];
    let mut min_flip: Option<i64> = None;
    loop {
        let norm = g.iter().map(|x| x.abs()).max().unwrap_or(0);
        if min_flip.is_none_or(|mf| norm < mf) && norm > 0 {
            let shifted = s.shift_grouped(partition, &g)?;
            if k.verdict(View::unshifted(&shifted)) != base {
                min_flip = Some(norm);
            }
        }
        let mut pos = m;
        loop {
            if pos == 0 {
                let value = match min_flip {
                    Some(mf) => RobustnessValue {
                        sign: base,
                        magnitude: mf - 1,
                        saturated: false,
                    },
                    None => RobustnessValue {
                        sign: base,
                        magnitude: r,
                        saturated: true,
                    },
                };
                return Ok(value);
            }
            pos -= 1;
            if g[pos] < r {
                g[pos] += 1;
                for x in &mut g[pos + 1..] {
                    *x = -r;
                }
                break;
            }
        }
    }
}

/// Synchronous STL temporal robustness at time `t`.
pub fn eta_stl(s: &Signal, phi: &StlFormula, t: i64, r: i64) -> Result<RobustnessValue, Error> {
    let k = StlChecker::new(phi.clone(), s.n(), t)?;
    eta(s, &k, r)
}

/// Asynchronous STL temporal robustness at time `t`.
pub fn theta_stl(
    s: &Signal,
    phi: &StlFormula,
    t: i64,
    r: i64,
    partition: &GroupPartition,
    policy: ExecPolicy,
) -> Result<RobustnessValue, Error> {
    let k = StlChecker::new(phi.clone(), s.n(), t)?;
    theta(s, &k, r, partition, policy)
}
