//! Sequential/parallel execution switch.
//!
//! Hot loops are written against these helpers so the same code runs on
//! rayon (feature `parallel`, the default) or as a plain loop. Both
//! branches preserve element order, so results are bit-identical across
//! modes and across worker counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Order-preserving map over indices `0..n`.
pub fn map_indexed<U, F>(mode: ExecMode, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Apply `f` to every element of `items`, mutating in place.
pub fn for_each_mut<T, F>(mode: ExecMode, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    match mode {
        ExecMode::Sequential => items.iter_mut().for_each(f),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => items.par_iter_mut().for_each(f),
    }
}

/// Fold chunks of `0..n` into accumulators and merge them.
///
/// `merge` must be associative and commutative for the result to be
/// independent of scheduling; integer counters qualify.
pub fn fold_chunks<A, F, M>(mode: ExecMode, n: usize, chunk: usize, init: impl Fn() -> A + Sync, f: F, merge: M) -> A
where
    A: Send,
    F: Fn(&mut A, usize) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let chunk = chunk.max(1);
    let run_chunk = |range: std::ops::Range<usize>| {
        let mut acc = init();
        for i in range {
            f(&mut acc, i);
        }
        acc
    };
    match mode {
        ExecMode::Sequential => run_chunk(0..n),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            let starts: Vec<usize> = (0..n).step_by(chunk).collect();
            starts
                .into_par_iter()
                .map(|s| run_chunk(s..(s + chunk).min(n)))
                .reduce(&init, merge)
        }
    }
}
