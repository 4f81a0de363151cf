//! Seeded random elements for tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lamp::{Lamp, LampElem};

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random nontrivial element of the base group.
pub fn nontrivial<R: Rng>(lamp: &Lamp, rng: &mut R) -> usize {
    rng.gen_range(1..lamp.base().order())
}

/// Shift-0 element with exactly `weight` nontrivial coordinates drawn from
/// `lo..=hi`. `weight` is clamped to the window size.
pub fn vector_with_weight<R: Rng>(lamp: &Lamp, rng: &mut R, weight: usize, lo: i64, hi: i64) -> LampElem {
    let mut idx: Vec<i64> = (lo..=hi).collect();
    idx.shuffle(rng);
    idx.truncate(weight);
    let coords: Vec<(i64, usize)> = idx.into_iter().map(|i| (i, nontrivial(lamp, rng))).collect();
    lamp.elem(0, coords)
}

/// Random element with weight at most `max_weight`, indices in `lo..=hi`
/// and shift in `-max_shift..=max_shift`.
pub fn element<R: Rng>(lamp: &Lamp, rng: &mut R, max_weight: usize, lo: i64, hi: i64, max_shift: i64) -> LampElem {
    let w = rng.gen_range(0..=max_weight);
    let v = vector_with_weight(lamp, rng, w, lo, hi);
    let k = rng.gen_range(-max_shift..=max_shift);
    lamp.with_shift(&v, k)
}
