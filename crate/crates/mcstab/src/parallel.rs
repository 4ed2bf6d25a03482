//! Tiny indirection over the data-parallel inner loops.
//!
//! With the `parallel` feature (default) the loops run on the rayon pool;
//! without it they run sequentially. Both paths produce results in index
//! order, so outputs are bit-identical regardless of feature or schedule.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..len).map(f).collect()
}
