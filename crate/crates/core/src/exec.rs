//! Chunked execution of independent index ranges.
//!
//! Work is split into fixed-size chunks whose results come back in chunk
//! order, so any reduction done by the caller is independent of how many
//! workers ran.

use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Executor {
    workers: usize,
}

impl Executor {
    /// `workers = 0` uses every available core; 1 runs on the calling thread.
    pub fn new(workers: usize) -> Self {
        Executor { workers }
    }

    pub fn sequential() -> Self {
        Executor { workers: 1 }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Applies `f` to consecutive ranges of at most `chunk` indices covering
    /// `0..total`, returning results in range order.
    pub fn map_chunks<T, F>(&self, total: u64, chunk: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(Range<u64>) -> T + Sync + Send,
    {
        if chunk == 0 {
            return Err(Error::Contract("chunk size must be positive".into()));
        }
        let n_chunks = total.div_ceil(chunk);
        let range = move |i: u64| i * chunk..((i + 1) * chunk).min(total);
        self.dispatch(n_chunks, |i| f(range(i)))
    }

    #[cfg(feature = "parallel")]
    fn dispatch<T, F>(&self, n_chunks: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        if self.workers == 1 || n_chunks <= 1 {
            return Ok((0..n_chunks).map(f).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(|| (0..n_chunks).into_par_iter().map(f).collect()))
    }

    #[cfg(not(feature = "parallel"))]
    fn dispatch<T, F>(&self, n_chunks: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        Ok((0..n_chunks).map(f).collect())
    }
}
