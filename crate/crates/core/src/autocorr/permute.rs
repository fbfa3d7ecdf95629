//! Randomization machinery shared by the global and local statistics.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the master seed
//! and a counter (permutation index for global statistics, observation
//! index for local ones), so results do not depend on how the work is
//! split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest pool for which exhaustive enumeration is accepted (10! arrangements).
pub const MAX_EXHAUSTIVE_POOL: usize = 10;

pub(crate) fn substream(seed: u64, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    rng
}

pub(crate) fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    partial_shuffle(rng, items, items.len());
}

/// Moves a uniform random `k`-subset into `items[..k]`.
pub(crate) fn partial_shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T], k: usize) {
    let len = items.len();
    for t in 0..k.min(len.saturating_sub(1)) {
        let pick = rng.random_range(t..len);
        items.swap(t, pick);
    }
}

/// Advances `perm` to the next lexicographic permutation; false once the
/// last one has been reached.
pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

pub(crate) fn arrangements(pool: usize) -> Result<u64> {
    if pool > MAX_EXHAUSTIVE_POOL {
        return Err(Error::InvalidConfig(format!(
            "exhaustive enumeration over {pool} values exceeds the limit of {MAX_EXHAUSTIVE_POOL}"
        )));
    }
    Ok((1..=pool as u64).product())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_enumeration_covers_all() {
        let mut p = vec![0, 1, 2, 3];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 24);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<u32> = (0..4).map(|_| 0).scan(substream(7, 3), |r, _: u32| Some(r.random())).collect();
        let b: Vec<u32> = (0..4).map(|_| 0).scan(substream(7, 3), |r, _: u32| Some(r.random())).collect();
        let c: Vec<u32> = (0..4).map(|_| 0).scan(substream(7, 4), |r, _: u32| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn partial_shuffle_picks_distinct_items() {
        let mut rng = substream(1, 0);
        let mut v: Vec<usize> = (0..10).collect();
        partial_shuffle(&mut rng, &mut v, 4);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
    }
}
