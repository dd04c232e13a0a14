//! Execution policy for the data-parallel loops.
//!
//! The `parallel` feature (on by default) links rayon; shell enumeration and
//! Monte Carlo sampling then fan out across the thread pool when asked to.
//! Without the feature, or with [`ExecPolicy::Sequential`], the same loops
//! run on the calling thread. Results are identical either way; only wall
//! time differs.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// Reads `TEMPRISK_THREADS`: unset or > 1 keeps the default parallel
    /// policy, `1` forces sequential execution.
    pub fn from_env() -> ExecPolicy {
        match std::env::var("TEMPRISK_THREADS") {
            Ok(v) if v.trim() == "1" => ExecPolicy::Sequential,
            _ => ExecPolicy::Parallel,
        }
    }
}

/// Caps the global rayon pool at `TEMPRISK_THREADS` workers. Call once at
/// process start; later calls are ignored by rayon.
pub fn init_thread_cap() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("TEMPRISK_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    }
}

/// Short-circuiting any() over items, parallel when the policy and feature
/// allow it. `f` may fail; the first error observed is returned.
pub fn try_any<T: Sync, E: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<bool, E> + Sync + Send,
    policy: ExecPolicy,
) -> Result<bool, E> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if policy == ExecPolicy::Parallel {
            return match items
                .par_iter()
                .try_for_each(|t| match f(t) {
                    Ok(true) => Err(Ok(())),
                    Ok(false) => Ok(()),
                    Err(e) => Err(Err(e)),
                }) {
                Ok(()) => Ok(false),
                Err(Ok(())) => Ok(true),
                Err(Err(e)) => Err(e),
            };
        }
    }
    let _ = policy;
    for t in items {
        if f(t)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Maps `0..n` to results, parallel when the policy and feature allow it.
/// Output order is by index regardless of scheduling.
pub fn map_indexed<R: Send, E: Send>(
    n: usize,
    f: impl Fn(usize) -> Result<R, E> + Sync + Send,
    policy: ExecPolicy,
) -> Result<Vec<R>, E> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if policy == ExecPolicy::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = policy;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn try_any_finds_and_propagates() {
        let items: Vec<i32> = (0..100).collect();
        for policy in [ExecPolicy::Sequential, ExecPolicy::Parallel] {
            let hit = try_any(&items, |&x| Ok::<_, ()>(x == 57), policy).unwrap();
            assert!(hit);
            let miss = try_any(&items, |&x| Ok::<_, ()>(x == 1000), policy).unwrap();
            assert!(!miss);
            let err = try_any(&items, |&x| if x > 10 { Err("boom") } else { Ok(false) }, policy);
            assert_eq!(err, Err("boom"));
        }
    }

    #[test]
    fn map_indexed_is_ordered() {
        for policy in [ExecPolicy::Sequential, ExecPolicy::Parallel] {
            let v = map_indexed(10, |i| Ok::<_, ()>(i * i), policy).unwrap();
            assert_eq!(v, (0..10).map(|i| i * i).collect::<Vec<_>>());
        }
    }
}
