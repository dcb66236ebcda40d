use rayon::ThreadPool;

use crate::error::{Error, Result};

/// Dedicated pool with exactly `workers` threads.
pub(crate) fn pool(workers: usize) -> Result<ThreadPool> {
    if workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}
