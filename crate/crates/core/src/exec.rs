//! Data-parallel evaluation with a sequential fallback.
//!
//! Every search in the crate funnels its inner loop through an
//! [`Executor`]. Results never depend on the executor: maps preserve index
//! order and minimum searches break ties on the smallest index.
//! [`DefaultExecutor`] is [`Parallel`] when the `parallel` feature is on
//! and [`Sequential`] otherwise.

pub trait Executor: Copy + Send + Sync {
    /// `f(0), f(1), …, f(len-1)` in index order.
    fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// Smallest `(key, index)` over indices where `f` returns a key.
    fn min_range<K, F>(self, len: usize, f: F) -> Option<(K, usize)>
    where
        K: Ord + Send,
        F: Fn(usize) -> Option<K> + Sync + Send;

    fn map_slice<'a, I, T, F>(self, items: &'a [I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&'a I) -> T + Sync + Send,
    {
        self.map_range(items.len(), |i| f(&items[i]))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }

    fn min_range<K, F>(self, len: usize, f: F) -> Option<(K, usize)>
    where
        K: Ord + Send,
        F: Fn(usize) -> Option<K> + Sync + Send,
    {
        (0..len).filter_map(|i| f(i).map(|k| (k, i))).min()
    }
}

#[cfg(feature = "parallel")]
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

#[cfg(feature = "parallel")]
impl Executor for Parallel {
    fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }

    fn min_range<K, F>(self, len: usize, f: F) -> Option<(K, usize)>
    where
        K: Ord + Send,
        F: Fn(usize) -> Option<K> + Sync + Send,
    {
        use rayon::prelude::*;
        (0..len)
            .into_par_iter()
            .with_min_len(256)
            .filter_map(|i| f(i).map(|k| (k, i)))
            .min()
    }
}

#[cfg(feature = "parallel")]
pub type DefaultExecutor = Parallel;

#[cfg(not(feature = "parallel"))]
pub type DefaultExecutor = Sequential;

#[cfg(test)]
mod tests {
    use super::*;

    fn check<E: Executor>(exec: E) {
        assert_eq!(exec.map_range(5, |i| i * i), vec![0, 1, 4, 9, 16]);
        // ties resolve to the smallest index
        let keys = [3, 1, 2, 1, 5];
        assert_eq!(exec.min_range(keys.len(), |i| Some(keys[i])), Some((1, 1)));
        assert_eq!(exec.min_range(4, |i| (i > 1).then_some(7 - i)), Some((4, 3)));
        assert_eq!(exec.min_range::<usize, _>(3, |_| None), None);
    }

    #[test]
    fn sequential_semantics() {
        check(Sequential);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential() {
        check(Parallel);
        let f = |i: usize| Some((i * 7919) % 1013);
        assert_eq!(Parallel.min_range(10_000, f), Sequential.min_range(10_000, f));
    }
}
