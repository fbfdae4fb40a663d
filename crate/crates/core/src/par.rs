//! Order-preserving map over an index range, parallel when the
//! `parallel` feature is on. Callers reduce the returned vector
//! sequentially, so results are identical either way.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Calls `f(first_index, chunk)` on consecutive `chunk_len`-sized pieces of
/// `out`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk<T, F>(out: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    use rayon::prelude::*;
    out.par_chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i * chunk_len, c));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk<T, F>(out: &mut [T], chunk_len: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    out.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i * chunk_len, c));
}
