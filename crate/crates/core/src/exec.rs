//! Data-parallel map with a sequential fallback.
//!
//! Sweep points and Monte Carlo samples are independent pure computations.
//! Work is assigned by index and collected in index order, so results are
//! bit-identical whatever the worker count, including the sequential build
//! (`--no-default-features`).

#[cfg(feature = "parallel")]
pub(crate) fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Caps the global worker pool at `n` threads. Has no effect once a pool
/// exists (the first call wins) and is a no-op in the sequential build.
#[cfg(feature = "parallel")]
pub fn set_worker_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
}

#[cfg(not(feature = "parallel"))]
pub fn set_worker_threads(_n: usize) {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let out = indexed_map(100, |i| i * i);
        for (i, &v) in out.iter().enumerate() {
            assert_eq!(v, i * i);
        }
    }
}
