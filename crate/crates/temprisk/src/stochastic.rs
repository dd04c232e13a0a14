//! Seeded stochastic process models and the Monte Carlo risk pipeline.
//!
//! A model is a base trajectory generator (optionally with Gaussian noise on
//! named scalar parameters), a group partition, and one time-shift
//! distribution per group. Realization `i` of a model with seed `s` is a
//! deterministic function of `(s, i)`: parameter noise and shifts come from
//! ChaCha8 streams keyed by `(s, i, purpose)`, so realizations are
//! reproducible across runs, platforms, and thread counts, and adding a
//! shift distribution never disturbs the base draws.
//!
//! Distributions yield time shifts `kappa` (the realization reads the base
//! at `t + kappa`). A start delayed by `d` steps is the shift `-d`; the
//! Poisson variant draws the delay `d >= 0` and applies `-d`.

use crate::exec::{map_indexed, ExecPolicy};
use crate::risk::{build_report, RiskReport, RiskRequest, SampleSet};
use crate::robustness::{eta, theta, Checker, RobustnessValue};
use crate::semantics::Sign;
use crate::signal::{GroupPartition, Signal};
use crate::Error;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-group time-shift distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDistribution {
    /// Fixed shift `kappa` in steps.
    Deterministic { shift: i64 },
    /// Uniform integer shift on `[-d, d]` inclusive.
    UniformInt { d: i64 },
    /// Poisson-distributed start delay with rate `lambda`; the applied
    /// shift is the negated delay.
    Poisson { lambda: f64 },
}

impl ShiftDistribution {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            ShiftDistribution::Deterministic { .. } => Ok(()),
            ShiftDistribution::UniformInt { d } => {
                if *d < 0 {
                    Err(Error::Validation(format!("uniform bound d={d} is negative")))
                } else {
                    Ok(())
                }
            }
            ShiftDistribution::Poisson { lambda } => {
                if !(*lambda > 0.0 && *lambda <= 50.0) {
                    Err(Error::Validation(format!(
                        "poisson lambda must lie in (0, 50], got {lambda}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> i64 {
        match self {
            ShiftDistribution::Deterministic { shift } => *shift,
            ShiftDistribution::UniformInt { d } => uniform_int(rng, -d, *d),
            ShiftDistribution::Poisson { lambda } => -poisson(rng, *lambda),
        }
    }
}

// splitmix64, used to key the per-realization ChaCha streams
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stream purposes; distinct constants keep draws independent.
const DOMAIN_PARAMS: u64 = 0x70_61_72_61;
const DOMAIN_SHIFTS: u64 = 0x73_68_66_74;

pub(crate) fn stream_rng(seed: u64, index: u64, domain: u64) -> ChaCha8Rng {
    let mut state = seed ^ domain.rotate_left(17) ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform f64 in [0, 1) from the top 53 bits of a draw.
fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Uniform integer on `[lo, hi]` by rejection, bias-free.
fn uniform_int(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    debug_assert!(lo <= hi);
    let span = (hi - lo) as u64 + 1;
    if span == 1 {
        return lo;
    }
    let zone = (u64::MAX / span) * span;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return lo + (x % span) as i64;
        }
    }
}

/// Standard normal via the Box-Muller transform:
/// `sqrt(-2 ln u1) * cos(2 pi u2)` with `u1` in (0, 1].
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - unit_f64(rng);
    let u2 = unit_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Poisson draw by CDF inversion (sequential search); fine for the small
/// rates used here.
fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> i64 {
    let u = unit_f64(rng);
    let mut k = 0i64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf && k < 1_000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

/// Named scalar parameters for a base generator.
pub type Params = BTreeMap<String, f64>;

/// Parameterized trajectory generator.
pub type BuildFn = Box<dyn Fn(&Params) -> Result<Signal, Error> + Sync + Send>;

/// Base trajectory source: a fixed signal or a parameterized generator.
pub enum BaseSource {
    Fixed(Signal),
    Generator { params: Params, build: BuildFn },
}

/// Gaussian perturbation on one named parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamNoise {
    pub name: String,
    pub sigma: f64,
}

/// Seeded stochastic process model.
pub struct ProcessModel {
    base: BaseSource,
    groups: GroupPartition,
    shift_dists: Vec<ShiftDistribution>,
    noise: Vec<ParamNoise>,
    seed: u64,
}

impl ProcessModel {
    pub fn new(
        base: BaseSource,
        groups: GroupPartition,
        shift_dists: Vec<ShiftDistribution>,
        noise: Vec<ParamNoise>,
        seed: u64,
    ) -> Result<Self, Error> {
        if shift_dists.len() != groups.group_count() {
            return Err(Error::Validation(format!(
                "{} shift distributions for {} groups",
                shift_dists.len(),
                groups.group_count()
            )));
        }
        for d in &shift_dists {
            d.validate()?;
        }
        for n in &noise {
            if !(n.sigma >= 0.0) {
                return Err(Error::Validation(format!(
                    "noise sigma for '{}' must be >= 0, got {}",
                    n.name, n.sigma
                )));
            }
            if let BaseSource::Generator { params, .. } = &base {
                if !params.contains_key(&n.name) {
                    return Err(Error::Validation(format!(
                        "noise names unknown parameter '{}'",
                        n.name
                    )));
                }
            } else {
                return Err(Error::Validation(
                    "parameter noise requires a generator base".into(),
                ));
            }
        }
        Ok(ProcessModel {
            base,
            groups,
            shift_dists,
            noise,
            seed,
        })
    }

    pub fn groups(&self) -> &GroupPartition {
        &self.groups
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The noise-free, shift-free base trajectory.
    pub fn nominal(&self) -> Result<Signal, Error> {
        match &self.base {
            BaseSource::Fixed(s) => Ok(s.clone()),
            BaseSource::Generator { params, build } => build(params),
        }
    }

    /// Group shifts drawn for realization `i`.
    pub fn draw_shifts(&self, i: u64) -> Vec<i64> {
        let mut rng = stream_rng(self.seed, i, DOMAIN_SHIFTS);
        self.shift_dists.iter().map(|d| d.draw(&mut rng)).collect()
    }

    fn perturbed_base(&self, i: u64) -> Result<Signal, Error> {
        match &self.base {
            BaseSource::Fixed(s) => Ok(s.clone()),
            BaseSource::Generator { params, build } => {
                if self.noise.is_empty() {
                    return build(params);
                }
                let mut rng = stream_rng(self.seed, i, DOMAIN_PARAMS);
                let mut p = params.clone();
                for n in &self.noise {
                    let eps = n.sigma * gaussian(&mut rng);
                    *p.get_mut(&n.name).expect("validated name") += eps;
                }
                build(&p)
            }
        }
    }

    /// Realization `i`: perturbed base trajectory, group-shifted.
    pub fn realize(&self, i: u64) -> Result<Signal, Error> {
        let base = self.perturbed_base(i)?;
        let shifts = self.draw_shifts(i);
        base.shift_grouped(&self.groups, &shifts)
    }
}

/// Which robustness notion the pipeline evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustnessKind {
    Eta,
    Theta,
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    /// Robustness bound in steps.
    pub r: i64,
    pub kind: RobustnessKind,
    pub requests: Vec<RiskRequest>,
}

impl McConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 {
            return Err(Error::Validation("realization count must be >= 1".into()));
        }
        if self.r < 0 {
            return Err(Error::Validation(format!("bound r must be >= 0, got {}", self.r)));
        }
        Ok(())
    }
}

/// Monte Carlo output: the report plus the raw cost samples.
#[derive(Debug, Clone)]
pub struct McOutcome {
    pub report: RiskReport,
    pub samples: SampleSet,
    /// Cost per realization in draw order (before sorting).
    pub costs_by_index: Vec<f64>,
}

/// Runs the pipeline: for each realization, the cost is the negated signed
/// robustness, so a saturated satisfying realization contributes `-r` (a
/// lower bound on its true cost). The report counts violating realizations
/// and how many samples saturated.
pub fn mc_risk(
    model: &ProcessModel,
    checker: &dyn Checker,
    cfg: &McConfig,
    policy: ExecPolicy,
) -> Result<McOutcome, Error> {
    cfg.validate()?;
    let per: Vec<(f64, Sign, bool)> = map_indexed(
        cfg.n,
        |i| {
            let s = model.realize(i as u64)?;
            let rv: RobustnessValue = match cfg.kind {
                RobustnessKind::Eta => eta(&s, checker, cfg.r)?,
                // realizations already fan out across workers; keep the
                // shell scan itself sequential
                RobustnessKind::Theta => {
                    theta(&s, checker, cfg.r, model.groups(), ExecPolicy::Sequential)?
                }
            };
            Ok::<_, Error>((-(rv.signed()) as f64, rv.sign, rv.saturated))
        },
        policy,
    )?;
    let costs_by_index: Vec<f64> = per.iter().map(|p| p.0).collect();
    let violation_count = per.iter().filter(|p| p.1 == Sign::Neg).count();
    let saturated_count = per.iter().filter(|p| p.2).count();
    let samples = SampleSet::new(costs_by_index.clone())?;
    let kind = match cfg.kind {
        RobustnessKind::Eta => "eta",
        RobustnessKind::Theta => "theta",
    };
    let report = build_report(
        &samples,
        &cfg.requests,
        kind,
        cfg.r,
        violation_count,
        saturated_count,
    );
    Ok(McOutcome {
        report,
        samples,
        costs_by_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_constraint;
    use crate::robustness::ConstraintChecker;

    fn fixed_model(seed: u64, dists: Vec<ShiftDistribution>) -> ProcessModel {
        let s = Signal::from_fn(2, 0, 200, 1.0, |i, t| {
            let t = t as f64;
            if i == 0 {
                (0.05 * t).sin()
            } else {
                (0.05 * t).sin() * 0.8
            }
        })
        .unwrap();
        ProcessModel::new(
            BaseSource::Fixed(s),
            GroupPartition::per_component(2),
            dists,
            vec![],
            seed,
        )
        .unwrap()
    }

    #[test]
    fn zero_shift_model_reproduces_nominal() {
        let m = fixed_model(
            7,
            vec![
                ShiftDistribution::Deterministic { shift: 0 },
                ShiftDistribution::Deterministic { shift: 0 },
            ],
        );
        let nominal = m.nominal().unwrap();
        let real = m.realize(3).unwrap();
        for t in -10..210 {
            for c in 0..2 {
                assert_eq!(real.component(c, t), nominal.component(c, t));
            }
        }
    }

    #[test]
    fn same_seed_same_realization() {
        let mk = || {
            fixed_model(
                42,
                vec![
                    ShiftDistribution::UniformInt { d: 5 },
                    ShiftDistribution::Poisson { lambda: 2.0 },
                ],
            )
        };
        let a = mk();
        let b = mk();
        for i in 0..20 {
            assert_eq!(a.realize(i).unwrap(), b.realize(i).unwrap());
            assert_eq!(a.draw_shifts(i), b.draw_shifts(i));
        }
        // different indices give different draws at least somewhere
        let shifts: Vec<_> = (0..50).map(|i| a.draw_shifts(i)).collect();
        assert!(shifts.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn uniform_shift_histogram_is_flat() {
        let d = 3i64;
        let m = fixed_model(99, vec![
            ShiftDistribution::UniformInt { d },
            ShiftDistribution::Deterministic { shift: 0 },
        ]);
        let n_draws = 100_000u64;
        let bins = (2 * d + 1) as usize;
        let mut counts = vec![0u64; bins];
        for i in 0..n_draws {
            let s = m.draw_shifts(i)[0];
            counts[(s + d) as usize] += 1;
        }
        let expected = n_draws as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let diff = c as f64 - expected;
                diff * diff / expected
            })
            .sum();
        // df = 6; 22.46 is the 0.999 quantile
        assert!(chi2 < 22.46, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn poisson_shifts_are_nonpositive_with_matching_mean() {
        let lambda = 2.5;
        let m = fixed_model(5, vec![
            ShiftDistribution::Poisson { lambda },
            ShiftDistribution::Deterministic { shift: 0 },
        ]);
        let n = 50_000u64;
        let mut sum = 0i64;
        for i in 0..n {
            let s = m.draw_shifts(i)[0];
            assert!(s <= 0);
            sum += s;
        }
        let mean = -(sum as f64) / n as f64;
        assert!((mean - lambda).abs() < 0.05, "mean delay {mean}");
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = stream_rng(11, 0, 123);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let z = gaussian(&mut rng);
            sum += z;
            sum2 += z * z;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn mc_risk_deterministic_across_policies_and_runs() {
        let m = fixed_model(
            2024,
            vec![
                ShiftDistribution::UniformInt { d: 4 },
                ShiftDistribution::UniformInt { d: 4 },
            ],
        );
        let c = parse_constraint("on [60,140]: 0.4 - abs(x[1] - x[2])\ndefault: 1\n").unwrap();
        let k = ConstraintChecker::new(c, 2).unwrap();
        let cfg = McConfig {
            n: 64,
            r: 12,
            kind: RobustnessKind::Theta,
            requests: vec![
                RiskRequest::Var { beta: 0.9, delta: 0.2 },
                RiskRequest::Cvar { beta: 0.9 },
                RiskRequest::Expectation,
            ],
        };
        let a = mc_risk(&m, &k, &cfg, ExecPolicy::Sequential).unwrap();
        let b = mc_risk(&m, &k, &cfg, ExecPolicy::Parallel).unwrap();
        assert_eq!(a.costs_by_index, b.costs_by_index);
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
    }

    #[test]
    fn violation_count_consistent_with_costs() {
        let m = fixed_model(
            77,
            vec![
                ShiftDistribution::UniformInt { d: 30 },
                ShiftDistribution::UniformInt { d: 30 },
            ],
        );
        let c = parse_constraint("on [60,140]: 0.4 - abs(x[1] - x[2])\ndefault: 1\n").unwrap();
        let k = ConstraintChecker::new(c, 2).unwrap();
        let cfg = McConfig {
            n: 200,
            r: 10,
            kind: RobustnessKind::Theta,
            requests: vec![],
        };
        let out = mc_risk(&m, &k, &cfg, ExecPolicy::Sequential).unwrap();
        // negative cost implies a satisfying realization, and every violating
        // realization has nonnegative cost
        let nonneg = out.costs_by_index.iter().filter(|&&z| z >= 0.0).count();
        assert!(out.report.violation_count <= nonneg);
        assert!(out.report.violation_count > 0, "want some violations in this setup");
    }

    #[test]
    fn insufficient_samples_surfaces_in_report() {
        let m = fixed_model(
            1,
            vec![
                ShiftDistribution::Deterministic { shift: 0 },
                ShiftDistribution::Deterministic { shift: 0 },
            ],
        );
        let c = parse_constraint("on [60,140]: 0.4 - abs(x[1] - x[2])\ndefault: 1\n").unwrap();
        let k = ConstraintChecker::new(c, 2).unwrap();
        let cfg = McConfig {
            n: 1,
            r: 5,
            kind: RobustnessKind::Eta,
            requests: vec![RiskRequest::Var { beta: 0.98, delta: 0.01 }],
        };
        let out = mc_risk(&m, &k, &cfg, ExecPolicy::Sequential).unwrap();
        assert_eq!(out.samples.len(), 1);
        let entry = &out.report.var[0];
        assert!(entry.error.is_some());
        assert_eq!(entry.required_n, Some(6623));
    }
}
