//! Data-parallel map over independent jobs (trials, grid cells).
//!
//! With the `parallel` feature the work is spread over a rayon pool; without
//! it every call runs sequentially. Output order always follows the input
//! index, so results do not depend on scheduling.

/// How to execute a batch of independent jobs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    /// Plain loop on the calling thread.
    Sequential,
    /// Rayon pool with this many threads; 0 means one per core.
    Threads(usize),
    /// The global rayon pool.
    #[default]
    Global,
}

impl Parallelism {
    /// `--jobs N` convention: 1 is sequential, 0 is every core.
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            1 => Parallelism::Sequential,
            0 => Parallelism::Global,
            n => Parallelism::Threads(n),
        }
    }
}

/// `(0..n).map(f).collect()` under the requested parallelism.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, parallelism: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    match parallelism {
        Parallelism::Sequential => (0..n).map(f).collect(),
        Parallelism::Global => (0..n).into_par_iter().map(f).collect(),
        Parallelism::Threads(threads) => {
            match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                // pool creation only fails on OS thread limits; fall back to the global pool
                Err(_) => (0..n).into_par_iter().map(f).collect(),
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, _parallelism: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
