//! Grid evaluation strategy.
//!
//! Every check in this crate is a map over a grid of independent points
//! followed by an in-order reduction. [`Executor`] abstracts the map so the
//! std companion can run it on a thread pool while results stay in index
//! order, which keeps reductions bit-identical across worker counts.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `f(0), ..., f(len - 1)` and returns the results in index order.
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every point on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}
