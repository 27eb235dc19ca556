//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the `Parallel` mode dispatches to
//! rayon; without it both modes run sequentially. Callers only use
//! per-element maps whose outputs are reduced afterwards in index order, so
//! results are bit-identical across modes.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Apply `f` to consecutive chunks of `out` (chunk `i` covers elements
/// `i * chunk .. (i + 1) * chunk`).
pub fn for_each_chunk_mut<T, F>(mode: ExecMode, out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = mode;
    out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Map over `items`, preserving order.
pub fn map<I, T, F>(mode: ExecMode, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Run `f` inside a rayon pool of `workers` threads when given, otherwise
/// on the global pool (or inline without the `parallel` feature).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = workers;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(ExecMode::Sequential, &xs, |x| x * x);
        let b = map(ExecMode::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);

        let mut s = vec![0usize; 100];
        let mut p = vec![0usize; 100];
        for_each_chunk_mut(ExecMode::Sequential, &mut s, 7, |i, c| c.iter_mut().for_each(|v| *v = i));
        for_each_chunk_mut(ExecMode::Parallel, &mut p, 7, |i, c| c.iter_mut().for_each(|v| *v = i));
        assert_eq!(s, p);
    }
}
