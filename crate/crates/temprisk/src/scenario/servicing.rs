//! Two mobile robots on a cooperative servicing mission.
//!
//! Each robot is a planar double integrator (exact zero-order-hold
//! discretization) driven by a proportional-derivative tracker through a
//! waypoint schedule. The mission formula asks for a sequenced pair of
//! visits to region A, a joint meeting in region B, and an early charging
//! hold for each robot.
//!
//! Region geometry and the waypoint schedule are this crate's own choices;
//! the reported robustness values are properties of these trajectories, not
//! of any external reference.
//!
//! Signal layout: x[1..2] robot-1 position, x[3..4] robot-1 velocity,
//! x[5..6] robot-2 position, x[7..8] robot-2 velocity. Shift groups are the
//! two robots.

use crate::formula::StlFormula;
use crate::parse::parse_formula;
use crate::signal::{GroupPartition, Signal};
use crate::stochastic::{BaseSource, ProcessModel, ShiftDistribution};
use crate::Error;
use serde::{Deserialize, Serialize};

/// Axis-aligned box region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Box2 {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        ]
    }

    /// Membership as a predicate body over components `ix`, `iy` (1-based).
    fn pred_text(&self, ix: usize, iy: usize) -> String {
        format!(
            "pred{{min(min(x[{ix}] - {}, {} - x[{ix}]), min(x[{iy}] - {}, {} - x[{iy}]))}}",
            self.x_min, self.x_max, self.y_min, self.y_max
        )
    }
}

/// One waypoint: track `target` until `until_step` (exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub target: [f64; 2],
    pub until_step: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServicingConfig {
    /// Seconds per step; also the integrator sampling time.
    pub dt: f64,
    pub horizon_steps: i64,
    pub kp: f64,
    pub kd: f64,
    pub region_a: Box2,
    pub region_b: Box2,
    pub region_charge: Box2,
    pub start: [[f64; 2]; 2],
    pub schedule: [Vec<Waypoint>; 2],
}

impl Default for ServicingConfig {
    fn default() -> Self {
        let a = Box2 {
            x_min: 3.0,
            x_max: 5.0,
            y_min: -1.0,
            y_max: 1.0,
        };
        let b = Box2 {
            x_min: -5.0,
            x_max: -3.0,
            y_min: -1.0,
            y_max: 1.0,
        };
        let charge = Box2 {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        };
        let horizon = 200;
        ServicingConfig {
            dt: 0.1,
            horizon_steps: horizon,
            kp: 25.0,
            kd: 10.0,
            region_a: a,
            region_b: b,
            region_charge: charge,
            start: [[4.0, 0.0], [0.0, 0.0]],
            schedule: [
                vec![
                    Waypoint { target: a.center(), until_step: 7 },
                    Waypoint { target: charge.center(), until_step: 32 },
                    Waypoint { target: b.center(), until_step: 51 },
                    Waypoint { target: charge.center(), until_step: horizon },
                ],
                vec![
                    Waypoint { target: charge.center(), until_step: 16 },
                    Waypoint { target: a.center(), until_step: 34 },
                    Waypoint { target: b.center(), until_step: horizon },
                ],
            ],
        }
    }
}

impl ServicingConfig {
    fn validate(&self) -> Result<(), Error> {
        if !(self.dt > 0.0) {
            return Err(Error::Generation(format!("dt must be positive, got {}", self.dt)));
        }
        if self.horizon_steps < 1 {
            return Err(Error::Generation("horizon must be at least one step".into()));
        }
        for (r, sched) in self.schedule.iter().enumerate() {
            if sched.is_empty() {
                return Err(Error::Generation(format!("robot {} has an empty schedule", r + 1)));
            }
            let mut last = 0;
            for wp in sched {
                if wp.until_step < last {
                    return Err(Error::Generation(format!(
                        "robot {} schedule steps must be nondecreasing",
                        r + 1
                    )));
                }
                last = wp.until_step;
            }
            if last < self.horizon_steps {
                return Err(Error::Generation(format!(
                    "robot {} schedule ends at step {last}, horizon is {}",
                    r + 1,
                    self.horizon_steps
                )));
            }
        }
        Ok(())
    }

    /// Mission formula in the concrete syntax, before parsing.
    pub fn formula_text(&self) -> String {
        let a1 = self.region_a.pred_text(1, 2);
        let a2 = self.region_a.pred_text(5, 6);
        let b1 = self.region_b.pred_text(1, 2);
        let b2 = self.region_b.pred_text(5, 6);
        let c1 = self.region_charge.pred_text(1, 2);
        let c2 = self.region_charge.pred_text(5, 6);
        format!(
            "F[0,1](({a1} | {a2}) & F[1,5]({a1} | {a2})) & F[1,6]({b1} & {b2}) \
             & F[0,2] G[0,0.5] {c1} & F[0,2] G[0,0.5] {c2}"
        )
    }
}

fn simulate(cfg: &ServicingConfig) -> Result<Signal, Error> {
    cfg.validate()?;
    let ts = cfg.dt;
    let n_steps = (cfg.horizon_steps + 1) as usize;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n_steps);
    let mut pos = [cfg.start[0], cfg.start[1]];
    let mut vel = [[0.0f64; 2]; 2];
    for k in 0..cfg.horizon_steps + 1 {
        cols.push(vec![
            pos[0][0], pos[0][1], vel[0][0], vel[0][1], pos[1][0], pos[1][1], vel[1][0], vel[1][1],
        ]);
        for r in 0..2 {
            let target = cfg.schedule[r]
                .iter()
                .find(|wp| k < wp.until_step)
                .or_else(|| cfg.schedule[r].last())
                .expect("schedule validated nonempty")
                .target;
            for axis in 0..2 {
                let u = cfg.kp * (target[axis] - pos[r][axis]) - cfg.kd * vel[r][axis];
                pos[r][axis] += vel[r][axis] * ts + 0.5 * u * ts * ts;
                vel[r][axis] += u * ts;
            }
        }
    }
    Signal::new(8, 0, cols, ts)
}

/// Nominal trajectories, mission formula, and robot-group partition.
pub fn build(cfg: &ServicingConfig) -> Result<(Signal, StlFormula, GroupPartition), Error> {
    let signal = simulate(cfg)?;
    let formula = parse_formula(&cfg.formula_text(), cfg.dt)?;
    formula.validate(8)?;
    Ok((signal, formula, GroupPartition::chunks(8, 4)?))
}

/// Poisson start-delay model: robot `i` is delayed by a Poisson(`lambda_i`)
/// number of steps.
pub fn poisson_delay_model(
    cfg: &ServicingConfig,
    lambda1: f64,
    lambda2: f64,
    seed: u64,
) -> Result<ProcessModel, Error> {
    let (signal, _, groups) = build(cfg)?;
    ProcessModel::new(
        BaseSource::Fixed(signal),
        groups,
        vec![
            ShiftDistribution::Poisson { lambda: lambda1 },
            ShiftDistribution::Poisson { lambda: lambda2 },
        ],
        vec![],
        seed,
    )
}

/// In-region step windows of the nominal trajectories, for tests and docs.
pub fn region_windows(cfg: &ServicingConfig) -> Result<Vec<(String, i64, i64)>, Error> {
    let s = simulate(cfg)?;
    let mut out = Vec::new();
    for (name, region) in [
        ("r1_a", cfg.region_a),
        ("r1_b", cfg.region_b),
        ("r1_charge", cfg.region_charge),
    ] {
        out.extend(windows_of(&s, 0, 1, region, name));
    }
    for (name, region) in [
        ("r2_a", cfg.region_a),
        ("r2_b", cfg.region_b),
        ("r2_charge", cfg.region_charge),
    ] {
        out.extend(windows_of(&s, 4, 5, region, name));
    }
    Ok(out)
}

fn windows_of(s: &Signal, ix: usize, iy: usize, region: Box2, name: &str) -> Vec<(String, i64, i64)> {
    let mut spans = Vec::new();
    let mut open: Option<i64> = None;
    for t in s.t_min()..=s.t_max() {
        let inside = region.contains(s.component(ix, t), s.component(iy, t));
        match (inside, open) {
            (true, None) => open = Some(t),
            (false, Some(start)) => {
                spans.push((name.to_string(), start, t - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        spans.push((name.to_string(), start, s.t_max()));
    }
    spans
}
