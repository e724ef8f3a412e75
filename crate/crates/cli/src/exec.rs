use cmv_core::exec::Executor;
use rayon::prelude::*;

use crate::error::CliError;

/// Runs grid maps on a dedicated rayon pool. Results come back in index
/// order, so reductions downstream do not depend on the worker count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `None` uses rayon's default worker count.
    pub fn new(threads: Option<usize>) -> Result<Self, CliError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = threads {
            if k == 0 {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            builder = builder.num_threads(k);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..len).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_index_order() {
        let exec = RayonExecutor::new(Some(3)).unwrap();
        let out = exec.map(1000, |i| i * i);
        assert!(out.iter().enumerate().all(|(i, &v)| v == i * i));
        assert_eq!(exec.threads(), 3);
    }

    #[test]
    fn rejects_zero_threads() {
        assert!(matches!(RayonExecutor::new(Some(0)), Err(CliError::Config(_))));
    }
}
