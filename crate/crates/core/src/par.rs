//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run the same closures sequentially, so results are identical either
//! way as long as each closure is a pure function of its index.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for every `i in 0..n` and collects in index order.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Maps over a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Runs `op` on a pool limited to `threads` workers.
///
/// Falls back to running inline when the pool cannot be built or when the
/// crate is compiled without the `parallel` feature.
#[cfg(feature = "parallel")]
pub fn with_threads<R, OP>(threads: usize, op: OP) -> R
where
    R: Send,
    OP: FnOnce() -> R + Send,
{
    match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
    {
        Ok(pool) => pool.install(op),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running inline");
            op()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, OP>(_threads: usize, op: OP) -> R
where
    R: Send,
    OP: FnOnce() -> R + Send,
{
    op()
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
