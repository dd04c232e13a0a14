//! Three cars at a T-intersection.
//!
//! A non-cooperative car (green) approaches from the north on the vertical
//! road while two cooperative cars (red from the east, blue from the west)
//! cross on the horizontal road at constant speeds chosen to pass in a safe
//! order. The constraint demands that whenever green is within `eps1` of the
//! intersection center, both other cars keep a distance of at least `eps2`
//! from it.
//!
//! Signal layout (1-based in the spec syntax): x[1..2] green position,
//! x[3..4] red, x[5..6] blue. Shift groups are the three cars.

use crate::constraint::ConstraintSpec;
use crate::parse::{parse_constraint, parse_predicate};
use crate::robustness::Checker;
use crate::semantics::Sign;
use crate::signal::{GroupPartition, Signal, View};
use crate::stochastic::{BaseSource, ParamNoise, Params, ProcessModel, ShiftDistribution};
use crate::Error;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TScenario {
    S1,
    S2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TIntersectionConfig {
    pub scenario: TScenario,
    pub eps1: f64,
    pub eps2: f64,
    pub v_green: f64,
    pub v_red: f64,
    pub v_blue: f64,
    pub green0: [f64; 2],
    pub red0: [f64; 2],
    pub blue0: [f64; 2],
    /// Simulation horizon in time units.
    pub horizon: f64,
    /// Seconds per step.
    pub dt: f64,
    /// The constraint window extends this many steps past the simulated
    /// horizon on both sides, covering every time a shifted car can still be
    /// near the intersection for shift bounds up to the margin.
    pub margin_steps: i64,
}

impl TIntersectionConfig {
    fn base(scenario: TScenario, v_red: f64, v_blue: f64) -> Self {
        TIntersectionConfig {
            scenario,
            eps1: 10.0,
            eps2: 15.0,
            v_green: 15.0,
            v_red,
            v_blue,
            green0: [-5.0, 300.0],
            red0: [300.0, 5.0],
            blue0: [-300.0, -5.0],
            horizon: 60.0,
            dt: 0.1,
            margin_steps: 600,
        }
    }

    /// Blue passes first, then green, then red.
    pub fn s1() -> Self {
        Self::base(TScenario::S1, 12.0, 18.0)
    }

    /// Red passes first, then green, then blue.
    pub fn s2() -> Self {
        Self::base(TScenario::S2, 18.0, 12.0)
    }

    pub fn horizon_steps(&self) -> i64 {
        (self.horizon / self.dt).round() as i64
    }

    fn validate(&self) -> Result<(), Error> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::Generation(format!(
                "dt and horizon must be positive (dt={}, horizon={})",
                self.dt, self.horizon
            )));
        }
        if !(self.v_green > 0.0) || !(self.v_red > 0.0) || !(self.v_blue > 0.0) {
            return Err(Error::Generation(format!(
                "car speeds must be positive (green={}, red={}, blue={})",
                self.v_green, self.v_red, self.v_blue
            )));
        }
        Ok(())
    }

    fn params(&self) -> Params {
        let mut p = Params::new();
        p.insert("v_green".into(), self.v_green);
        p.insert("v_red".into(), self.v_red);
        p.insert("v_blue".into(), self.v_blue);
        p
    }
}

fn build_signal(cfg: &TIntersectionConfig, params: &Params) -> Result<Signal, Error> {
    cfg.validate()?;
    let v_green = params["v_green"];
    let v_red = params["v_red"];
    let v_blue = params["v_blue"];
    if !(v_green > 0.0) || !(v_red > 0.0) || !(v_blue > 0.0) {
        return Err(Error::Generation(format!(
            "perturbed car speeds must stay positive (green={v_green}, red={v_red}, blue={v_blue})"
        )));
    }
    let dt = cfg.dt;
    let (g0, r0, b0) = (cfg.green0, cfg.red0, cfg.blue0);
    Signal::from_fn(6, 0, cfg.horizon_steps(), dt, move |i, k| {
        let t = k as f64 * dt;
        match i {
            0 => g0[0],
            1 => g0[1] - v_green * t,
            2 => r0[0] - v_red * t,
            3 => r0[1],
            4 => b0[0] + v_blue * t,
            _ => b0[1],
        }
    })
}

/// The constraint body with the config's radii substituted in.
pub fn constraint_text(cfg: &TIntersectionConfig) -> String {
    format!(
        "max(-({} - norm2(x[1],x[2])), min(norm2(x[1]-x[3],x[2]-x[4]) - {}, norm2(x[1]-x[5],x[2]-x[6]) - {}))",
        cfg.eps1, cfg.eps2, cfg.eps2
    )
}

/// Nominal signal, constraint, and car-group partition.
///
/// Outside the active window every car sits at a held endpoint, so the
/// constraint value there is the constant value at that frozen
/// configuration; using it as the default makes the finite scan agree with
/// the infimum over all integer times.
pub fn build(cfg: &TIntersectionConfig) -> Result<(Signal, ConstraintSpec, GroupPartition), Error> {
    let signal = build_signal(cfg, &cfg.params())?;
    let expr = parse_predicate(&constraint_text(cfg))?;
    let default = expr
        .eval(signal.sample(signal.t_min()))
        .min(expr.eval(signal.sample(signal.t_max())));
    let lo = -cfg.margin_steps;
    let hi = cfg.horizon_steps() + cfg.margin_steps;
    let constraint = parse_constraint(&format!(
        "on [{lo},{hi}]: {}\ndefault: {default}\n",
        constraint_text(cfg)
    ))?;
    Ok((signal, constraint, GroupPartition::chunks(6, 2)?))
}

/// Process model with one uniform shift per car (bound `d` in steps) and
/// optional Gaussian speed noise applied to all three speeds.
pub fn process_model(
    cfg: &TIntersectionConfig,
    shifts: Vec<ShiftDistribution>,
    speed_sigma: f64,
    seed: u64,
) -> Result<ProcessModel, Error> {
    let noise = if speed_sigma > 0.0 {
        ["v_green", "v_red", "v_blue"]
            .iter()
            .map(|n| ParamNoise {
                name: (*n).to_string(),
                sigma: speed_sigma,
            })
            .collect()
    } else {
        vec![]
    };
    let cfg_owned = cfg.clone();
    ProcessModel::new(
        BaseSource::Generator {
            params: cfg.params(),
            build: Box::new(move |p| build_signal(&cfg_owned, p)),
        },
        GroupPartition::chunks(6, 2)?,
        shifts,
        noise,
        seed,
    )
}

/// Uniform-delay model matching the communication-delay study: every car's
/// start time is uniform on `[-d, d]` steps.
pub fn uniform_delay_model(
    cfg: &TIntersectionConfig,
    d: i64,
    speed_sigma: f64,
    seed: u64,
) -> Result<ProcessModel, Error> {
    process_model(
        cfg,
        vec![ShiftDistribution::UniformInt { d }; 3],
        speed_sigma,
        seed,
    )
}

/// Specialized constraint checker for this scenario.
///
/// The constraint can only fail while green is inside the `eps1` ball, and
/// green's vertical coordinate is monotone, so the checker binary-searches
/// the in-ball time range of the (shifted) green car and tests the two
/// inter-car distances only there. Verdicts agree exactly with evaluating
/// the parsed constraint over its active window; a unit test and the
/// acceptance suite cross-check that equivalence.
pub struct TIChecker {
    eps1_sq: f64,
    eps2_sq: f64,
    active_lo: i64,
    active_hi: i64,
}

impl TIChecker {
    pub fn new(cfg: &TIntersectionConfig) -> Self {
        TIChecker {
            eps1_sq: cfg.eps1 * cfg.eps1,
            eps2_sq: cfg.eps2 * cfg.eps2,
            active_lo: -cfg.margin_steps,
            active_hi: cfg.horizon_steps() + cfg.margin_steps,
        }
    }

    /// Smallest stored time with `|y| < bound`, by bisection on the
    /// non-increasing y coordinate; `None` when y never gets that low.
    fn in_ball_range(sig: &Signal, gx: f64, eps1_sq: f64) -> Option<(i64, i64)> {
        let bound_sq = eps1_sq - gx * gx;
        if bound_sq <= 0.0 {
            return None;
        }
        let bound = bound_sq.sqrt();
        let (lo, hi) = (sig.t_min(), sig.t_max());
        let y = |t: i64| sig.component(1, t);
        // y is non-increasing; in-ball needs |y| < bound strictly
        if y(lo) <= -bound || y(hi) >= bound {
            return None;
        }
        // first t with y(t) < bound ("y < bound" is monotone in t)
        let a = if y(lo) < bound {
            lo
        } else {
            let mut below = lo; // y(below) >= bound
            let mut above = hi; // y(above) < bound
            while above - below > 1 {
                let mid = below + (above - below) / 2;
                if y(mid) < bound {
                    above = mid;
                } else {
                    below = mid;
                }
            }
            above
        };
        if y(a) <= -bound {
            // y crossed the whole ball between two samples
            return None;
        }
        // last t with y(t) > -bound
        let b = if y(hi) > -bound {
            hi
        } else {
            let mut inside = a; // y(inside) > -bound
            let mut outside = hi; // y(outside) <= -bound
            while outside - inside > 1 {
                let mid = inside + (outside - inside) / 2;
                if y(mid) > -bound {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        Some((a, b))
    }
}

impl Checker for TIChecker {
    fn verdict(&self, v: View<'_>) -> Sign {
        let sig = v.signal();
        let zero_shifts = [0i64; 6];
        let shifts: &[i64] = v.shifts().unwrap_or(&zero_shifts);
        let (kg, kr, kb) = (shifts[0], shifts[2], shifts[4]);
        let gx = sig.component(0, 0);
        let Some((ball_lo, ball_hi)) = Self::in_ball_range(sig, gx, self.eps1_sq) else {
            return Sign::Pos;
        };
        // green's shifted view is in the ball at view times [ball_lo - kg,
        // ball_hi - kg]; outside the stored window the held endpoints are
        // out of the ball, so clamping cannot add in-ball times
        let lo = (ball_lo - kg).max(self.active_lo);
        let hi = (ball_hi - kg).min(self.active_hi);
        for t in lo..=hi {
            let gxx = sig.component(0, t + kg);
            let gyy = sig.component(1, t + kg);
            if gxx * gxx + gyy * gyy >= self.eps1_sq {
                continue;
            }
            let dxr = gxx - sig.component(2, t + kr);
            let dyr = gyy - sig.component(3, t + kr);
            if dxr * dxr + dyr * dyr < self.eps2_sq {
                return Sign::Neg;
            }
            let dxb = gxx - sig.component(4, t + kb);
            let dyb = gyy - sig.component(5, t + kb);
            if dxb * dxb + dyb * dyb < self.eps2_sq {
                return Sign::Neg;
            }
        }
        Sign::Pos
    }

    fn for_signal<'a>(&'a self, s: &'a Signal) -> Box<dyn crate::robustness::ShiftVerdict + 'a> {
        Box::new(TIPrepared::new(self, s))
    }
}

/// Per-signal acceleration for [`TIChecker`].
///
/// For a fixed signal, whether a shifted view collides depends only on the
/// relative shifts of red and blue against green (plus endpoint clamping,
/// which the tables cover by construction). Tabulating the dangerous
/// relative shifts once makes each verdict two lookups. Shift vectors that
/// push the in-ball view times outside the constraint's active window fall
/// back to the direct scan.
struct TIPrepared<'a> {
    checker: &'a TIChecker,
    sig: &'a Signal,
    ball: Option<(i64, i64)>,
    d_lo: i64,
    danger_red: Vec<bool>,
    danger_blue: Vec<bool>,
    kg_lo: i64,
    kg_hi: i64,
}

impl<'a> TIPrepared<'a> {
    fn new(checker: &'a TIChecker, sig: &'a Signal) -> Self {
        let gx = sig.component(0, 0);
        let ball = TIChecker::in_ball_range(sig, gx, checker.eps1_sq);
        let (mut d_lo, mut danger_red, mut danger_blue) = (0, Vec::new(), Vec::new());
        let (mut kg_lo, mut kg_hi) = (0, -1);
        if let Some((ball_lo, ball_hi)) = ball {
            // beyond this range every read of the other car clamps to one
            // held endpoint for every in-ball time, so the edge entries
            // cover all larger relative shifts
            d_lo = (sig.t_min() - 1) - ball_hi;
            let d_hi = (sig.t_max() + 1) - ball_lo;
            let width = (d_hi - d_lo + 1) as usize;
            danger_red = vec![false; width];
            danger_blue = vec![false; width];
            for (slot, (table_red, table_blue)) in
                danger_red.iter_mut().zip(&mut danger_blue).enumerate()
            {
                let delta = d_lo + slot as i64;
                for s in ball_lo..=ball_hi {
                    let gxx = sig.component(0, s);
                    let gyy = sig.component(1, s);
                    if gxx * gxx + gyy * gyy >= checker.eps1_sq {
                        continue;
                    }
                    let dxr = gxx - sig.component(2, s + delta);
                    let dyr = gyy - sig.component(3, s + delta);
                    if dxr * dxr + dyr * dyr < checker.eps2_sq {
                        *table_red = true;
                    }
                    let dxb = gxx - sig.component(4, s + delta);
                    let dyb = gyy - sig.component(5, s + delta);
                    if dxb * dxb + dyb * dyb < checker.eps2_sq {
                        *table_blue = true;
                    }
                    if *table_red && *table_blue {
                        break;
                    }
                }
            }
            // green shifts keeping all in-ball view times inside the active
            // window, where the table is exact
            kg_lo = ball_hi - checker.active_hi;
            kg_hi = ball_lo - checker.active_lo;
        }
        TIPrepared {
            checker,
            sig,
            ball,
            d_lo,
            danger_red,
            danger_blue,
            kg_lo,
            kg_hi,
        }
    }
}

impl crate::robustness::ShiftVerdict for TIPrepared<'_> {
    fn verdict_shifted(&self, kappa: &[i64]) -> Sign {
        if self.ball.is_none() {
            return Sign::Pos;
        }
        let (kg, kr, kb) = (kappa[0], kappa[2], kappa[4]);
        if kg < self.kg_lo || kg > self.kg_hi {
            return self.checker.verdict(View::shifted(self.sig, kappa));
        }
        let top = self.danger_red.len() as i64 - 1;
        let red_slot = ((kr - kg) - self.d_lo).clamp(0, top) as usize;
        let blue_slot = ((kb - kg) - self.d_lo).clamp(0, top) as usize;
        if self.danger_red[red_slot] || self.danger_blue[blue_slot] {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }
}
