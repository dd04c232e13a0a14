//! Risk measures over empirical cost samples.
//!
//! Costs arrive as a sorted tuple `Z^1 <= .. <= Z^N`. Provided measures:
//! the arithmetic mean, order-statistic brackets for the value-at-risk at
//! confidence `1 - delta` (gamma = sqrt(ln(2/delta) / 2N), upper index
//! ceil(N(beta+gamma)), lower index floor(N(beta-gamma)), 1-based), the
//! empirical conditional value-at-risk, and the exact value-at-risk of an
//! explicit finite distribution for use as a test oracle.

use crate::Error;
use serde::{Deserialize, Serialize};

/// Sorted empirical cost samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<f64>,
}

impl SampleSet {
    /// Sorts and stores; every sample must be finite and there must be at
    /// least one.
    pub fn new(mut samples: Vec<f64>) -> Result<Self, Error> {
        if samples.is_empty() {
            return Err(Error::Validation("sample set is empty".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("sample set has non-finite entries".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(SampleSet { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ascending samples.
    pub fn values(&self) -> &[f64] {
        &self.samples
    }

    /// 1-based order statistic.
    pub fn order_stat(&self, index_1based: usize) -> f64 {
        self.samples[index_1based - 1]
    }
}

/// Order-statistic value-at-risk bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarBracket {
    pub beta: f64,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
}

fn check_unit_open(name: &str, v: f64) -> Result<(), Error> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Validation(format!("{name} must lie in (0,1), got {v}")));
    }
    Ok(())
}

/// `gamma = sqrt(ln(2/delta) / (2N))`.
pub fn var_gamma(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Smallest `N` for which `gamma <= min(beta, 1-beta)`.
pub fn var_required_n(beta: f64, delta: f64) -> usize {
    let m = beta.min(1.0 - beta);
    ((2.0 / delta).ln() / (2.0 * m * m)).ceil() as usize
}

/// Order-statistic bracket for the value-at-risk at level `beta`: with
/// probability at least `1 - delta` the true value lies inside.
///
/// Indices are 1-based; "ceil"/"floor" mean nearest integer from above and
/// below, an exact `N(beta±gamma)` staying as is. Rounded indices are
/// clamped into `[1, N]` to absorb boundary float error.
pub fn var_bounds(z: &SampleSet, beta: f64, delta: f64) -> Result<(f64, f64), Error> {
    check_unit_open("beta", beta)?;
    check_unit_open("delta", delta)?;
    let n = z.len();
    let gamma = var_gamma(n, delta);
    if gamma > beta.min(1.0 - beta) {
        return Err(Error::InsufficientSamples {
            beta,
            delta,
            n,
            gamma,
            required_n: var_required_n(beta, delta),
        });
    }
    let nf = n as f64;
    let upper_idx = ((nf * (beta + gamma)).ceil() as usize).clamp(1, n);
    let lower_idx = ((nf * (beta - gamma)).floor() as usize).clamp(1, n);
    Ok((z.order_stat(lower_idx), z.order_stat(upper_idx)))
}

/// Exact value-at-risk of a finite discrete distribution: the smallest
/// support point whose cumulative probability reaches `beta`.
pub fn var_exact(pmf: &[(f64, f64)], beta: f64) -> Result<f64, Error> {
    check_unit_open("beta", beta)?;
    if pmf.is_empty() {
        return Err(Error::Validation("empty pmf".into()));
    }
    let mut points: Vec<(f64, f64)> = pmf.to_vec();
    for &(x, p) in &points {
        if !x.is_finite() || !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(format!("bad pmf entry ({x}, {p})")));
        }
    }
    let total: f64 = points.iter().map(|&(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "pmf sums to {total}, expected 1 within 1e-9"
        )));
    }
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut cdf = 0.0;
    for &(x, p) in &points {
        cdf += p;
        if cdf >= beta {
            return Ok(x);
        }
    }
    Ok(points.last().unwrap().0)
}

/// Empirical conditional value-at-risk: minimum over sample breakpoints of
/// `alpha + mean((Z - alpha)+) / (1 - beta)`. The objective is piecewise
/// linear with breakpoints at the samples, so this is the exact minimum.
pub fn cvar_estimate(z: &SampleSet, beta: f64) -> Result<f64, Error> {
    check_unit_open("beta", beta)?;
    let n = z.len() as f64;
    let scale = 1.0 / ((1.0 - beta) * n);
    let mut best = f64::INFINITY;
    // suffix sums make each candidate O(1): for alpha = Z^(i), the positive
    // part sums samples above index i
    let vals = z.values();
    let mut suffix = 0.0;
    let mut suffixes = vec![0.0; vals.len() + 1];
    for i in (0..vals.len()).rev() {
        suffix += vals[i];
        suffixes[i] = suffix;
    }
    for (i, &alpha) in vals.iter().enumerate() {
        let count_above = (vals.len() - i - 1) as f64;
        let tail = suffixes[i + 1] - count_above * alpha;
        let obj = alpha + scale * tail.max(0.0);
        if obj < best {
            best = obj;
        }
    }
    Ok(best)
}

/// Arithmetic mean.
pub fn expectation(z: &SampleSet) -> f64 {
    z.values().iter().sum::<f64>() / z.len() as f64
}

/// One risk-measure request for the Monte Carlo pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum RiskRequest {
    Var { beta: f64, delta: f64 },
    Cvar { beta: f64 },
    Expectation,
}

/// Evaluated value-at-risk bracket; `error` is set when the sample count
/// cannot support the requested `(beta, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarEntry {
    pub beta: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvarEntry {
    pub beta: f64,
    pub value: f64,
}

/// Risk summary of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub schema: u32,
    /// "eta" or "theta".
    pub kind: String,
    pub n: usize,
    pub r: i64,
    pub expectation: f64,
    /// Number of realizations with a negative verdict.
    pub violation_count: usize,
    /// Number of realizations whose robustness saturated at the bound.
    pub saturated_count: usize,
    pub var: Vec<VarEntry>,
    pub cvar: Vec<CvarEntry>,
}

/// Evaluates the requested measures over a sorted sample set. Bracket
/// requests that fail their sample-size precondition surface the error (and
/// the required N) in place instead of aborting the report.
pub fn build_report(
    samples: &SampleSet,
    requests: &[RiskRequest],
    kind: &str,
    r: i64,
    violation_count: usize,
    saturated_count: usize,
) -> RiskReport {
    let mut var = Vec::new();
    let mut cvar = Vec::new();
    for req in requests {
        match *req {
            RiskRequest::Var { beta, delta } => match var_bounds(samples, beta, delta) {
                Ok((lower, upper)) => var.push(VarEntry {
                    beta,
                    delta,
                    lower: Some(lower),
                    upper: Some(upper),
                    error: None,
                    required_n: None,
                }),
                Err(e) => {
                    let required_n = match &e {
                        Error::InsufficientSamples { required_n, .. } => Some(*required_n),
                        _ => None,
                    };
                    var.push(VarEntry {
                        beta,
                        delta,
                        lower: None,
                        upper: None,
                        error: Some(e.to_string()),
                        required_n,
                    });
                }
            },
            RiskRequest::Cvar { beta } => {
                if let Ok(value) = cvar_estimate(samples, beta) {
                    cvar.push(CvarEntry { beta, value });
                }
            }
            RiskRequest::Expectation => {}
        }
    }
    RiskReport {
        schema: 1,
        kind: kind.to_string(),
        n: samples.len(),
        r,
        expectation: expectation(samples),
        violation_count,
        saturated_count,
        var,
        cvar,
    }
}
