//! Pluggable execution of independent jobs.

use alloc::vec::Vec;

/// Runs `len` independent jobs and returns their results in index order,
/// so callers get identical output whatever the degree of parallelism.
pub trait Executor: Sync {
    fn map<T, F>(&self, len: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, len: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(job).collect()
    }
}
