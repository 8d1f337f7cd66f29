//! Data-parallel helpers. With the `parallel` feature these fan out over
//! rayon's pool; without it they run as plain sequential loops with the same
//! results. Reductions must be associative and commutative (all callers use
//! deterministic worst-case or sum reductions).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, preserving index order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps every index with a per-worker scratch value and reduces the results.
pub fn map_reduce_init<S, T, I, F, ID, R>(n: usize, init: I, f: F, identity: ID, reduce: R) -> T
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
    ID: Fn() -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map_init(init, f)
            .reduce(identity, reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        (0..n).fold(identity(), |acc, i| reduce(acc, f(&mut scratch, i)))
    }
}

pub fn map_reduce<T, F, ID, R>(n: usize, f: F, identity: ID, reduce: R) -> T
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    ID: Fn() -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    map_reduce_init(n, || (), |_, i| f(i), identity, reduce)
}

/// Smallest index satisfying `pred`.
pub fn find_first<F>(n: usize, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().find_first(|&i| pred(i))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).find(|&i| pred(i))
    }
}

/// Runs `f` on a single worker. Under the `parallel` feature this installs a
/// one-thread pool, which is how the benches compare both modes in one build.
pub fn single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("failed to build single-thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

/// Threads in the current pool, 1 without the `parallel` feature.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reductions_match_sequential() {
        let s = map_reduce(1000, |i| i as u64 * 3, || 0, |a, b| a + b);
        assert_eq!(s, (0..1000u64).map(|i| i * 3).sum::<u64>());
        assert_eq!(find_first(100, |i| i * i > 50), Some(8));
        assert_eq!(map_collect(5, |i| i * 2), vec![0, 2, 4, 6, 8]);
        assert_eq!(single_threaded(|| map_collect(3, |i| i)), vec![0, 1, 2]);
    }
}
