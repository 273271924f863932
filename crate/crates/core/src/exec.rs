//! Execution strategy for data-parallel loops.
//!
//! Callers split work into a fixed number of indexed pieces; results are
//! always returned in index order, so any reduction performed over them is
//! independent of the worker count. Without the `parallel` feature every
//! strategy runs sequentially.

/// How indexed work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel on a rayon pool; `workers: None` uses the global pool.
    Parallel {
        workers: Option<usize>,
    },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { workers: None }
    }
}

impl Execution {
    pub fn parallel(workers: Option<usize>) -> Self {
        Execution::Parallel { workers }
    }

    /// Whether this build can actually run work in parallel.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
    pub fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match *self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel { workers } => parallel_map(n, workers, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
    match workers {
        None => run(),
        Some(w) => match rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
        {
            Ok(pool) => pool.install(run),
            // Pool creation only fails on OS thread exhaustion; fall back to the global pool.
            Err(_) => run(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, _workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
