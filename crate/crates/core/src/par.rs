//! Data-parallel helpers. Every helper is an order-preserving map, so the
//! output does not depend on how rayon partitions the work.

use rayon::prelude::*;

const MIN_CHUNK: usize = 512;

pub(crate) fn map_pixels<T: Sync, U: Send>(src: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    src.par_iter().with_min_len(MIN_CHUNK).map(f).collect()
}

pub(crate) fn map_indices<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    (0..n).into_par_iter().with_min_len(MIN_CHUNK).map(f).collect()
}
