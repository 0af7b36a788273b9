//! Execution policy for data-parallel loops.
//!
//! Every reduction is computed chunk-wise: chunks of fixed length are reduced
//! sequentially and the chunk partials are then summed in index order. The
//! result is therefore bit-identical between [`Exec::Sequential`] and
//! [`Exec::Parallel`] and independent of the thread count.

use serde::{Deserialize, Serialize};

/// Length of the chunks used by ordered reductions.
pub const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    /// Runs on the rayon pool when the `parallel` feature is enabled, otherwise
    /// falls back to sequential execution.
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// `(0..len).map(f).collect()`, preserving order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Fills `out[i] = f(i)`.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }

    /// Applies `f(i, chunk)` to consecutive chunks of `out` of length `width`.
    pub fn fill_chunks<T, F>(self, out: &mut [T], width: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            out.par_chunks_mut(width)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        for (i, c) in out.chunks_mut(width).enumerate() {
            f(i, c);
        }
    }

    /// Ordered sum of `f(i)` for `i in 0..len`.
    pub fn sum<F>(self, len: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = len.div_ceil(CHUNK);
        let partial = |c: usize| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).map(&f).sum::<f64>()
        };
        self.map(chunks, partial).into_iter().sum()
    }

    /// Ordered sum of a pair of quantities.
    pub fn sum2<F>(self, len: usize, f: F) -> (f64, f64)
    where
        F: Fn(usize) -> (f64, f64) + Sync + Send,
    {
        let chunks = len.div_ceil(CHUNK);
        let partial = |c: usize| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).fold((0.0, 0.0), |acc, i| {
                let (a, b) = f(i);
                (acc.0 + a, acc.1 + b)
            })
        };
        self.map(chunks, partial)
            .into_iter()
            .fold((0.0, 0.0), |acc, (a, b)| (acc.0 + a, acc.1 + b))
    }

    /// Ordered maximum of `f(i)`; returns 0 for an empty range.
    pub fn max<F>(self, len: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = len.div_ceil(CHUNK);
        let partial = |c: usize| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).map(&f).fold(0.0_f64, f64::max)
        };
        self.map(chunks, partial).into_iter().fold(0.0, f64::max)
    }
}
