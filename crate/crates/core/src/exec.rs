//! Data-parallel helpers.
//!
//! Every batch loop in the crate goes through [`map`] so the same code runs on
//! the rayon pool (feature `parallel`, on by default) or sequentially. Output
//! order always matches input order, which keeps reductions bit-stable.

/// How a batch of independent evaluations is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work-stealing pool when the `parallel` feature is enabled,
    /// sequential otherwise.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually fans out to worker threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(mode: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Order-preserving map over an index range.
pub fn map_range<R, F>(mode: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}
