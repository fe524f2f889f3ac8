//! Switch between rayon and plain iteration.
//!
//! Callers pass a runtime `parallel` flag; without the `parallel` feature it
//! is ignored and everything runs on the calling thread. Output order is the
//! input order either way.

/// Applies `f` to every fixed-width row of `rows` and concatenates what it
/// appends.
pub(crate) fn expand_rows<T, F>(rows: &[T], width: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Copy + Send + Sync,
    F: Fn(&[T], &mut Vec<T>) + Send + Sync,
{
    debug_assert!(width > 0);
    #[cfg(feature = "parallel")]
    if parallel && rows.len() / width >= 512 {
        use rayon::prelude::*;
        let parts: Vec<Vec<T>> = rows
            .par_chunks(width)
            .with_min_len(128)
            .fold(Vec::new, |mut acc, row| {
                f(row, &mut acc);
                acc
            })
            .collect();
        return parts.concat();
    }
    let _ = parallel;
    let mut out = Vec::new();
    for row in rows.chunks(width) {
        f(row, &mut out);
    }
    out
}

/// Maps `f` over `items`, keeping order.
pub(crate) fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
