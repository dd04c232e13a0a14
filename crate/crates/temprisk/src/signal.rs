//! Finite-window multivariate signals on integer time, extended to all of the
//! integers by holding the endpoint samples.
//!
//! A [`Signal`] stores an `n x (t_max - t_min + 1)` matrix of samples. Reading
//! it at any integer time is total: times left of the window return the first
//! column, times right of it return the last. Time shifting therefore has an
//! exact meaning on the whole time axis, and the shift operations below
//! preserve it: `sample(shift_sync(s, k), t) == sample(s, t + k)` for every
//! integer `t`, not just inside the stored window.

use crate::Error;
use serde::{Deserialize, Serialize};

/// Discrete-time signal with endpoint-hold extension beyond the stored window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    n: usize,
    t_min: i64,
    t_max: i64,
    /// Column-major: `values[col * n + i]` is component `i` at `t_min + col`.
    values: Vec<f64>,
    /// Seconds per step. Metadata only; core math is in steps.
    dt: f64,
}

impl Signal {
    /// Builds a signal from column-major values.
    pub fn new(n: usize, t_min: i64, columns: Vec<Vec<f64>>, dt: f64) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::Signal("component count must be positive".into()));
        }
        if columns.is_empty() {
            return Err(Error::Signal("signal window must be nonempty".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::Signal(format!("dt must be positive, got {dt}")));
        }
        let mut values = Vec::with_capacity(n * columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Signal(format!(
                    "column {j} has {} entries, expected {n}",
                    col.len()
                )));
            }
            for &v in col {
                if !v.is_finite() {
                    return Err(Error::Signal(format!("non-finite entry {v} in column {j}")));
                }
                values.push(v);
            }
        }
        let t_max = t_min + columns.len() as i64 - 1;
        Ok(Signal {
            n,
            t_min,
            t_max,
            values,
            dt,
        })
    }

    /// Generates a signal by sampling `f(component, step)` over `[t_min, t_max]`.
    pub fn from_fn(
        n: usize,
        t_min: i64,
        t_max: i64,
        dt: f64,
        f: impl Fn(usize, i64) -> f64,
    ) -> Result<Self, Error> {
        if t_max < t_min {
            return Err(Error::Signal(format!("t_min {t_min} > t_max {t_max}")));
        }
        let cols = (t_min..=t_max)
            .map(|t| (0..n).map(|i| f(i, t)).collect())
            .collect();
        Signal::new(n, t_min, cols, dt)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_min(&self) -> i64 {
        self.t_min
    }

    pub fn t_max(&self) -> i64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        (self.t_max - self.t_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    fn clamp_col(&self, t: i64) -> usize {
        (t.clamp(self.t_min, self.t_max) - self.t_min) as usize
    }

    /// Sample vector at time `t`, with endpoint hold outside the window.
    pub fn sample(&self, t: i64) -> &[f64] {
        let c = self.clamp_col(t);
        &self.values[c * self.n..(c + 1) * self.n]
    }

    /// Single component at time `t`, with endpoint hold.
    #[inline]
    pub fn component(&self, i: usize, t: i64) -> f64 {
        debug_assert!(i < self.n);
        self.values[self.clamp_col(t) * self.n + i]
    }

    /// Synchronous shift: the result reads `self` at `t + kappa` for every `t`.
    ///
    /// Implemented by relabeling the window, which keeps the extension exact
    /// on all of the integers.
    pub fn shift_sync(&self, kappa: i64) -> Signal {
        Signal {
            n: self.n,
            t_min: self.t_min - kappa,
            t_max: self.t_max - kappa,
            values: self.values.clone(),
            dt: self.dt,
        }
    }

    /// Per-component shift: component `i` of the result reads component `i`
    /// of `self` at `t + kappa[i]`.
    ///
    /// The stored window is widened by the largest shift magnitude so that the
    /// result's own endpoint hold reproduces the shifted extension exactly at
    /// every integer time.
    pub fn shift_async(&self, kappa: &[i64]) -> Result<Signal, Error> {
        if kappa.len() != self.n {
            return Err(Error::Signal(format!(
                "shift vector has length {}, signal has {} components",
                kappa.len(),
                self.n
            )));
        }
        let pad = kappa.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0) as i64;
        let t_min = self.t_min - pad;
        let t_max = self.t_max + pad;
        let mut values = Vec::with_capacity(self.n * (t_max - t_min + 1) as usize);
        for t in t_min..=t_max {
            for (i, &k) in kappa.iter().enumerate() {
                values.push(self.component(i, t + k));
            }
        }
        Ok(Signal {
            n: self.n,
            t_min,
            t_max,
            values,
            dt: self.dt,
        })
    }

    /// Group shift: every component in group `j` is shifted by `shifts[j]`.
    pub fn shift_grouped(&self, partition: &GroupPartition, shifts: &[i64]) -> Result<Signal, Error> {
        let kappa = partition.expand(self.n, shifts)?;
        self.shift_async(&kappa)
    }
}

/// Read-only view of a signal with an optional per-component time shift.
///
/// `value(i, t)` equals `signal.component(i, t + shift[i])`, which is exactly
/// what materializing the shift would produce at every integer time. Verdict
/// evaluations go through views so that shift enumeration never copies
/// sample data.
#[derive(Clone, Copy)]
pub struct View<'a> {
    signal: &'a Signal,
    shifts: Option<&'a [i64]>,
}

impl<'a> View<'a> {
    pub fn unshifted(signal: &'a Signal) -> Self {
        View {
            signal,
            shifts: None,
        }
    }

    /// Per-component shifted view; `shifts` must have length `signal.n()`.
    pub fn shifted(signal: &'a Signal, shifts: &'a [i64]) -> Self {
        debug_assert_eq!(shifts.len(), signal.n());
        View {
            signal,
            shifts: Some(shifts),
        }
    }

    pub fn n(&self) -> usize {
        self.signal.n()
    }

    pub fn signal(&self) -> &'a Signal {
        self.signal
    }

    pub fn shifts(&self) -> Option<&'a [i64]> {
        self.shifts
    }

    #[inline]
    pub fn value(&self, i: usize, t: i64) -> f64 {
        match self.shifts {
            None => self.signal.component(i, t),
            Some(k) => self.signal.component(i, t + k[i]),
        }
    }
}

/// Partition of the component indices `{0, .., n-1}` into shift groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
}

impl GroupPartition {
    /// Validates disjointness, nonemptiness, and exact cover of `{0, .., n-1}`.
    pub fn new(groups: Vec<Vec<usize>>, n: usize) -> Result<Self, Error> {
        if groups.is_empty() {
            return Err(Error::Validation("partition has no groups".into()));
        }
        let mut seen = vec![false; n];
        for (j, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Validation(format!("group {j} is empty")));
            }
            for &i in g {
                if i >= n {
                    return Err(Error::Validation(format!(
                        "group {j} names component {i}, signal has {n}"
                    )));
                }
                if seen[i] {
                    return Err(Error::Validation(format!(
                        "component {i} appears in more than one group"
                    )));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Validation(
                "groups do not cover all components".into(),
            ));
        }
        Ok(GroupPartition { groups })
    }

    /// One group per component: the fully asynchronous case.
    pub fn per_component(n: usize) -> Self {
        GroupPartition {
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// A single group holding every component: the synchronous case.
    pub fn single(n: usize) -> Self {
        GroupPartition {
            groups: vec![(0..n).collect()],
        }
    }

    /// Consecutive equally sized chunks, e.g. one group per agent.
    pub fn chunks(n: usize, chunk: usize) -> Result<Self, Error> {
        if chunk == 0 || !n.is_multiple_of(chunk) {
            return Err(Error::Validation(format!(
                "cannot split {n} components into chunks of {chunk}"
            )));
        }
        Ok(GroupPartition {
            groups: (0..n / chunk)
                .map(|j| (j * chunk..(j + 1) * chunk).collect())
                .collect(),
        })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Component-to-group index map; validates that the partition covers a
    /// signal with `n` components.
    pub fn component_map(&self, n: usize) -> Result<Vec<usize>, Error> {
        self.expand(n, &vec![0; self.groups.len()])?;
        let mut map = vec![0usize; n];
        for (j, g) in self.groups.iter().enumerate() {
            for &i in g {
                map[i] = j;
            }
        }
        Ok(map)
    }

    /// Expands per-group shifts into a per-component shift vector.
    pub fn expand(&self, n: usize, shifts: &[i64]) -> Result<Vec<i64>, Error> {
        if shifts.len() != self.groups.len() {
            return Err(Error::Validation(format!(
                "{} group shifts given, partition has {} groups",
                shifts.len(),
                self.groups.len()
            )));
        }
        let mut kappa = vec![0i64; n];
        for (g, &s) in self.groups.iter().zip(shifts) {
            for &i in g {
                if i >= n {
                    return Err(Error::Validation(format!(
                        "partition names component {i}, signal has {n}"
                    )));
                }
                kappa[i] = s;
            }
        }
        Ok(kappa)
    }

    /// Parses the CLI syntax `"1,2;3,4"` (1-based component indices,
    /// semicolon-separated groups).
    pub fn parse(text: &str, n: usize) -> Result<Self, Error> {
        let mut groups = Vec::new();
        for part in text.split(';') {
            let mut g = Vec::new();
            for tok in part.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let idx: usize = tok
                    .parse()
                    .map_err(|_| Error::Validation(format!("bad component index '{tok}'")))?;
                if idx == 0 {
                    return Err(Error::Validation("component indices are 1-based".into()));
                }
                g.push(idx - 1);
            }
            if !g.is_empty() {
                groups.push(g);
            }
        }
        GroupPartition::new(groups, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Signal {
        // one component, values 5,6,7 on [0,2]
        Signal::new(1, 0, vec![vec![5.0], vec![6.0], vec![7.0]], 1.0).unwrap()
    }

    #[test]
    fn sample_inside_and_held() {
        let s = ramp();
        assert_eq!(s.sample(1), &[6.0]);
        assert_eq!(s.sample(-10), &[5.0]);
        assert_eq!(s.sample(100), &[7.0]);
    }

    #[test]
    fn sync_shift_definition() {
        let s = ramp();
        let r = s.shift_sync(1);
        assert_eq!(
            (0..3).map(|t| r.component(0, t)).collect::<Vec<_>>(),
            vec![6.0, 7.0, 7.0]
        );
        let id = s.shift_sync(0);
        for t in -5..8 {
            assert_eq!(id.component(0, t), s.component(0, t));
        }
    }

    #[test]
    fn sync_shift_composes_exactly() {
        let s = ramp();
        for a in -5..=5 {
            for b in -5..=5 {
                let lhs = s.shift_sync(a).shift_sync(b);
                let rhs = s.shift_sync(a + b);
                for t in s.t_min() - 10..=s.t_max() + 10 {
                    assert_eq!(lhs.component(0, t), rhs.component(0, t), "a={a} b={b} t={t}");
                }
            }
        }
    }

    #[test]
    fn async_shift_matches_definition() {
        let s = Signal::new(
            2,
            0,
            vec![vec![1.0, 9.0], vec![2.0, 8.0], vec![3.0, 7.0]],
            1.0,
        )
        .unwrap();
        let r = s.shift_async(&[1, -1]).unwrap();
        assert_eq!(r.component(0, 1), 3.0);
        assert_eq!(r.component(1, 1), 9.0);
        // exact on the whole axis, including past the original window
        for t in -8..12 {
            assert_eq!(r.component(0, t), s.component(0, t + 1), "t={t}");
            assert_eq!(r.component(1, t), s.component(1, t - 1), "t={t}");
        }
    }

    #[test]
    fn constant_async_shift_equals_sync() {
        let s = Signal::new(
            2,
            -1,
            vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]],
            1.0,
        )
        .unwrap();
        for c in -4..=4i64 {
            let a = s.shift_async(&[c, c]).unwrap();
            let b = s.shift_sync(c);
            for t in -10..12 {
                for i in 0..2 {
                    assert_eq!(a.component(i, t), b.component(i, t));
                }
            }
        }
    }

    #[test]
    fn grouped_shift_expands() {
        let s = Signal::from_fn(4, 0, 5, 1.0, |i, t| (i as f64) * 10.0 + t as f64).unwrap();
        let p = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let g = s.shift_grouped(&p, &[2, -1]).unwrap();
        let a = s.shift_async(&[2, 2, -1, -1]).unwrap();
        for t in -5..12 {
            for i in 0..4 {
                assert_eq!(g.component(i, t), a.component(i, t));
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = ramp();
        assert!(s.shift_async(&[1, 2]).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(GroupPartition::new(vec![vec![0], vec![0]], 1).is_err());
        assert!(GroupPartition::new(vec![vec![0]], 2).is_err());
        assert!(GroupPartition::new(vec![vec![0], vec![]], 1).is_err());
        assert!(GroupPartition::new(vec![vec![0, 2], vec![1]], 3).is_ok());
        let p = GroupPartition::parse("1,2;3,4", 4).unwrap();
        assert_eq!(p.group_count(), 2);
        assert_eq!(p.groups()[1], vec![2, 3]);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Signal::new(0, 0, vec![vec![]], 1.0).is_err());
        assert!(Signal::new(1, 0, vec![], 1.0).is_err());
        assert!(Signal::new(1, 0, vec![vec![f64::NAN]], 1.0).is_err());
        assert!(Signal::new(1, 0, vec![vec![1.0, 2.0]], 1.0).is_err());
        assert!(Signal::new(1, 0, vec![vec![1.0]], 0.0).is_err());
    }
}
