//! Optional data parallelism, capped by the `FTL_THREADS` environment
//! variable (`0` means sequential; unset means one thread per core).

use std::sync::OnceLock;

use rayon::prelude::*;

fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = match std::env::var("FTL_THREADS") {
            Ok(v) => v.trim().parse::<usize>().unwrap_or(1),
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        if threads <= 1 {
            return None;
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
    })
    .as_ref()
}

/// `(0..n).map(f)`, evaluated in parallel when `n >= min_parallel` and a
/// pool is available. The output order is always the index order.
pub(crate) fn map_indexed<T, F>(n: usize, min_parallel: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match pool() {
        Some(p) if n >= min_parallel => p.install(|| (0..n).into_par_iter().map(&f).collect()),
        _ => (0..n).map(f).collect(),
    }
}

/// Concatenation of `row(i)` for `i in 0..n`.
pub(crate) fn map_rows<T, F>(n: usize, row: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> Vec<T> + Sync + Send,
{
    map_indexed(n, 64, row).into_iter().flatten().collect()
}
