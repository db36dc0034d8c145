//! Order-preserving batch execution.
//!
//! With the `parallel` feature, [`Parallelism::Threads`] runs work on a
//! dedicated rayon pool; without it every executor is sequential. Output
//! order always follows input order.

use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Threads(usize),
}

impl Parallelism {
    pub fn from_count(n: usize) -> Self {
        if n <= 1 {
            Parallelism::Sequential
        } else {
            Parallelism::Threads(n)
        }
    }
}

#[derive(Clone)]
pub struct Executor {
    mode: Parallelism,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
    #[cfg(not(feature = "parallel"))]
    _pool: Option<Arc<()>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("mode", &self.mode)
            .finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::sequential()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Self {
            mode: Parallelism::Sequential,
            #[cfg(feature = "parallel")]
            pool: None,
            #[cfg(not(feature = "parallel"))]
            _pool: None,
        }
    }

    #[cfg(feature = "parallel")]
    pub fn new(mode: Parallelism) -> Self {
        match mode {
            Parallelism::Sequential => Self::sequential(),
            Parallelism::Threads(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .thread_name(|i| format!("genquant-{i}"))
                    .build()
                    .expect("failed to build thread pool");
                Self {
                    mode,
                    pool: Some(Arc::new(pool)),
                }
            }
        }
    }

    #[cfg(not(feature = "parallel"))]
    pub fn new(mode: Parallelism) -> Self {
        if let Parallelism::Threads(n) = mode {
            log::debug!("built without `parallel`; ignoring {n} threads");
        }
        Self::sequential()
    }

    /// The effective mode (always sequential without the `parallel` feature).
    pub fn mode(&self) -> Parallelism {
        self.mode
    }

    /// Map `f` over `items`, returning results in input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect());
        }
        items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
    }
}
