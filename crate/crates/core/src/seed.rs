//! Seed splitting.
//!
//! One top-level seed drives every random stream of a run. Component `k` of
//! stream family `tag` receives
//!
//! ```text
//! sub_seed(seed, tag, k) = splitmix64(splitmix64(seed ^ splitmix64(tag)) + k)
//! ```
//!
//! so adding a new family never perturbs the existing ones.

/// One round of the SplitMix64 finalizer. Also used as the partition hash.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream families with fixed tags. The numeric values are part of the
/// reproducibility contract and must not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Arrivals = 1,
    Placement = 2,
    Sweep = 3,
}

pub fn sub_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    let family = splitmix64(seed ^ splitmix64(stream as u64));
    splitmix64(family.wrapping_add(index))
}
