//! Execution helpers: data-parallel loops with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon;
//! without it they compile to plain loops. Parallel dispatch can also be
//! disabled at runtime with [`set_parallel`], which the benchmarks use to
//! compare both paths in one binary and the CLI maps `--threads 1` onto.
//!
//! Reductions are deterministic regardless of thread count: partial results
//! are accumulated per fixed-size chunk into an indexed buffer and summed
//! sequentially, so float rounding does not depend on scheduling.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Enable or disable parallel dispatch at runtime.
pub fn set_parallel(on: bool) {
    PARALLEL.store(on, Ordering::Relaxed);
}

/// Whether parallel dispatch is compiled in and currently enabled.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::Relaxed)
}

/// Apply `f` to consecutive chunks of `data`, passing the chunk index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    debug_assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Apply `f` to consecutive chunks of a shared slice.
pub fn for_each_chunk<T, F>(data: &[T], chunk: usize, f: F)
where
    T: Sync,
    F: Fn(usize, &[T]) + Sync,
{
    debug_assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        data.par_chunks(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    for (i, c) in data.chunks(chunk).enumerate() {
        f(i, c);
    }
}

/// Deterministic chunked sum: `f` maps each chunk to a partial sum; partials
/// are combined in index order.
pub fn sum_chunks<T, F>(data: &[T], chunk: usize, f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &[T]) -> f64 + Sync,
{
    debug_assert!(chunk > 0);
    let n_chunks = data.len().div_ceil(chunk);
    let mut partials = vec![0.0f64; n_chunks];
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        partials
            .par_iter_mut()
            .zip(data.par_chunks(chunk))
            .enumerate()
            .for_each(|(i, (p, c))| *p = f(i, c));
        return partials.iter().sum();
    }
    for (i, c) in data.chunks(chunk).enumerate() {
        partials[i] = f(i, c);
    }
    partials.iter().sum()
}

/// Run `f` over the index range `0..n`, in parallel when enabled.
pub fn for_each_index<F>(n: usize, f: F)
where
    F: Fn(usize) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        (0..n).into_par_iter().for_each(f);
        return;
    }
    for i in 0..n {
        f(i);
    }
}

/// Map each index in `0..out.len()` to a value, writing in place.
pub fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
        return;
    }
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}
