use fgw_core::Executor;
use rayon::prelude::*;

/// A fixed-size rayon pool; results come back in job order.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `workers = None` uses the available parallelism.
    pub fn new(workers: Option<usize>) -> Self {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = workers {
            builder = builder.num_threads(n.max(1));
        }
        Self {
            pool: builder.build().expect("thread pool"),
        }
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, len: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..len).into_par_iter().map(job).collect())
    }
}
