pub mod coherence;
pub mod power;
pub mod simulate;

/// Folds indices into a fresh 64-bit sub-seed (splitmix64 chain), so
/// replicate and role streams never overlap by construction of the inputs.
pub fn sub_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &part in parts {
        z = splitmix64(z ^ splitmix64(part));
    }
    z
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
