//! Deterministic seed derivation for parallel and repeated experiments.
//!
//! Every experiment stores one master seed; per-cell and per-trial seeds are
//! derived by mixing the master seed with integer tags, so a run is
//! reproducible regardless of execution order or thread count.

/// SplitMix64 finalizer; full-period bijective mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a sequence of tags.
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master ^ 0x6a09_e667_f3bc_c909);
    for &t in tags {
        state = mix(state ^ mix(t));
    }
    state
}
