//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream whose 64-bit seed is
//! derived from a master seed and a list of tags:
//!
//! ```text
//! key = splitmix64(master)
//! for tag in tags: key = splitmix64(key ^ tag)
//! stream = ChaCha8Rng::seed_from_u64(key)
//! ```
//!
//! Uniforms take the top 53 bits of `next_u64`. A complex normal sample
//! consumes two words `a`, `b`:
//!
//! ```text
//! u1 = ((a >> 11) + 1) * 2^-53        in (0, 1]
//! u2 = (b >> 11) * 2^-53              in [0, 1)
//! z  = sqrt(-ln u1) * (cos 2*pi*u2 + i sin 2*pi*u2)
//! ```
//!
//! which gives real and imaginary parts that are each N(0, 1/2), so E|z|^2 = 1.

use crate::C64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub const TAG_PRECODERS: u64 = 0x5052_4543;
pub const TAG_CHANNELS: u64 = 0x4348_414e;
pub const TAG_FRAME: u64 = 0x4652_414d;
pub const TAG_TRIAL: u64 = 0x5452_4941;
pub const TAG_ANALYSIS: u64 = 0x414e_414c;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_key(master: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(master), |key, &tag| splitmix64(key ^ tag))
}

/// Independent stream for `(master, tags...)`.
pub fn substream(master: u64, tags: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_key(master, tags))
}

#[inline]
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One CN(0, 1) sample.
#[inline]
pub fn complex_normal(rng: &mut impl RngCore) -> C64 {
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = uniform(rng);
    let r = (-u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    C64::new(r * theta.cos(), r * theta.sin())
}

#[inline]
pub fn bit(rng: &mut impl RngCore) -> bool {
    rng.next_u64() >> 63 == 1
}

/// Uniform integer in `0..n` (n > 0) by rejection, independent of `rand`'s
/// internal range sampling so the stream layout stays documented.
pub fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    debug_assert!(n > 0);
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % n;
        }
    }
}

/// `k` distinct indices from `0..n`, sorted, drawn uniformly (partial Fisher-Yates).
pub fn sample_indices(rng: &mut impl RngCore, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut out = pool[..k].to_vec();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let mut a = substream(7, &[1, 2]);
        let mut b = substream(7, &[1, 2]);
        let mut c = substream(7, &[2, 1]);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn sample_indices_are_distinct_and_sorted() {
        let mut rng = substream(3, &[]);
        for _ in 0..50 {
            let idx = sample_indices(&mut rng, 20, 7);
            assert_eq!(idx.len(), 7);
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
            assert!(idx.iter().all(|&i| i < 20));
        }
        assert_eq!(sample_indices(&mut rng, 5, 5), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn uniform_index_draws_cover_range() {
        let mut rng = substream(11, &[]);
        let mut counts = [0usize; 6];
        for _ in 0..60_000 {
            counts[below(&mut rng, 6) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 500.0, "{counts:?}");
        }
    }
}
