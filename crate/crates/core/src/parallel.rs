//! Replicate-level parallelism. With the `parallel` feature the closures run
//! on the rayon pool; without it they run in order on the calling thread.
//! Results are always collected in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f)` with results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Run `f` with at most `threads` workers (`None` = all cores).
#[cfg(feature = "parallel")]
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, F>(_threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    f()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
