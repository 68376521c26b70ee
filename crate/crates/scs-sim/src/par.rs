//! Data-parallel map helpers.
//!
//! With the `parallel` feature (default) the indexed maps run on rayon;
//! without it they fall back to a plain sequential loop. Callers pair these
//! with per-index RNG streams so both paths yield identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
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

/// Sequential reference version of [`map_indexed`], available regardless of
/// feature flags; benches use it to compare against the parallel path.
pub fn map_indexed_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
