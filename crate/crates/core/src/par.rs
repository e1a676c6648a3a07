//! Data-parallel helpers over independent units (patches, sweep points).
//!
//! With the `parallel` feature the closures run on the rayon pool when the
//! caller asks for it; otherwise everything runs in order on the calling
//! thread. Results are always returned in input order, so the outcome does
//! not depend on scheduling.

/// Apply `f` to every element, possibly concurrently.
pub fn for_each_mut<T, F>(items: &mut [T], parallel: bool, f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        items
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, item)| f(i, item));
        return;
    }
    let _ = parallel;
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Map `f` over every element, possibly concurrently, keeping input order.
pub fn map_mut<T, R, F>(items: &mut [T], parallel: bool, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items
            .par_iter_mut()
            .enumerate()
            .map(|(i, item)| f(i, item))
            .collect();
    }
    let _ = parallel;
    items
        .iter_mut()
        .enumerate()
        .map(|(i, item)| f(i, item))
        .collect()
}

/// Map over a shared slice, possibly concurrently, keeping input order.
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(&f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Whether the crate was built with the rayon backend.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let xs: Vec<u64> = (0..100).collect();
        let a = map(&xs, true, |x| x * x);
        let b = map(&xs, false, |x| x * x);
        assert_eq!(a, b);
        let mut ys = xs.clone();
        let c = map_mut(&mut ys, true, |i, y| {
            *y += 1;
            i as u64 + *y
        });
        assert_eq!(c[10], 21);
        for_each_mut(&mut ys, true, |_, y| *y *= 2);
        assert_eq!(ys[3], 8);
    }
}
