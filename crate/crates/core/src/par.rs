//! Order-preserving maps over sample grids.
//!
//! With the `parallel` feature (default) [`map`] runs on the rayon pool;
//! otherwise it is the sequential loop. Both return results in input order,
//! so any reduction done afterwards is deterministic.

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
pub fn map<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

/// Always-sequential variant of [`map`].
pub fn map_sequential<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    F: Fn(&I) -> T,
{
    items.iter().map(f).collect()
}

/// Like [`map`], stopping at the first error in input order.
pub fn try_map<I, T, E, F>(items: &[I], f: F) -> Result<Vec<T>, E>
where
    I: Sync,
    T: Send,
    E: Send,
    F: Fn(&I) -> Result<T, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let a = map(&items, |v| v * v + 1);
        let b = map_sequential(&items, |v| v * v + 1);
        assert_eq!(a, b);
    }

    #[test]
    fn first_error_in_order() {
        let items: Vec<i32> = (0..100).collect();
        let r: Result<Vec<i32>, i32> = try_map(&items, |&v| if v % 7 == 6 { Err(v) } else { Ok(v) });
        assert_eq!(r, Err(6));
    }
}
