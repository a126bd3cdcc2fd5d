//! Enumeration of complementary index pairs `{S, S^c}`.
//!
//! Each pair is visited once by walking the subsets that contain index 0 in
//! reflected Gray-code order: walk position `i` maps to the subset
//! `(gray(i) << 1) | 1`, and consecutive positions differ by exactly one
//! element. The walk is cut into fixed-size chunks that are evaluated in
//! parallel; chunk boundaries never depend on the worker count, so
//! incremental state rebuilt at each chunk start gives bitwise-identical
//! results for any number of threads.

use std::cmp::Ordering;
use std::ops::Range;

use rayon::prelude::*;

/// Walk positions per parallel chunk.
pub const CHUNK_LEN: u64 = 1 << 12;

/// Largest `N` the bitmask representation supports.
pub const MAX_N: usize = 63;

/// Number of complementary pairs for `n` indices (`2^(n-1)`).
pub fn pair_count(n: usize) -> u64 {
    assert!((1..=MAX_N).contains(&n));
    1u64 << (n - 1)
}

pub fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Subset mask at walk position `i`; always contains index 0.
pub fn subset_at(i: u64) -> u64 {
    (gray(i) << 1) | 1
}

/// Element toggled when stepping from position `i - 1` to `i` (`i >= 1`).
pub fn toggled_at(i: u64) -> usize {
    i.trailing_zeros() as usize + 1
}

pub fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|&b| mask >> b & 1 == 1).collect()
}

pub fn mask_of(indices: &[usize]) -> u64 {
    indices.iter().fold(0, |m, &i| m | 1 << i)
}

/// Lexicographic order of the sorted index lists of two subsets.
pub fn lex_cmp(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let p = (a ^ b).trailing_zeros();
    let above = if p == 63 { 0 } else { !((1u64 << (p + 1)) - 1) };
    let (with_p, without_p) = if a >> p & 1 == 1 { (a, b) } else { (b, a) };
    // The list lacking p is smaller only if it ends before p (is a prefix).
    let with_p_smaller = without_p & above != 0;
    let a_smaller = (with_p == a) == with_p_smaller;
    if a_smaller {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Splits the walk over `n` indices into fixed chunks, evaluates `f` on each
/// in parallel, and returns the results in chunk order.
pub fn par_chunks<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<u64>) -> R + Sync + Send,
{
    let total = pair_count(n);
    let chunks = total.div_ceil(CHUNK_LEN);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_LEN;
            f(start..(start + CHUNK_LEN).min(total))
        })
        .collect()
}
