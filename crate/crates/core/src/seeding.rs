//! Deterministic seed derivation.
//!
//! Every random draw in an experiment descends from one master seed. Child
//! seeds are derived by hashing the master seed together with a component
//! label and integer indices (step, protocol arm, epoch, ...), so adding or
//! reordering work items never perturbs the draws of unrelated items, and
//! two runs with equal configuration produce byte-identical outputs.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte slice, resumable via `state`.
fn fnv1a(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= b as u64;
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// Hash arbitrary bytes to a 64-bit value (FNV-1a).
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    fnv1a(FNV_OFFSET, bytes)
}

/// Derive a child seed from a master seed, a component label, and indices.
///
/// The label keeps unrelated components (data generation, model init,
/// shuffling, evaluation) on independent streams even when their indices
/// coincide.
pub fn child_seed(master: u64, component: &str, indices: &[u64]) -> u64 {
    let mut state = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    state = fnv1a(state, component.as_bytes());
    for &ix in indices {
        state = fnv1a(state, &ix.to_le_bytes());
    }
    state
}

/// The RNG used everywhere in this workspace.
///
/// ChaCha8 is reproducible across platforms and releases, unlike `StdRng`,
/// whose algorithm is unspecified.
pub type Rng = ChaCha8Rng;

/// Construct the workspace RNG from a seed.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Construct the workspace RNG directly from a derived child seed.
pub fn child_rng(master: u64, component: &str, indices: &[u64]) -> Rng {
    rng(child_seed(master, component, indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn fnv_matches_reference_vectors() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(hash_bytes(b""), 0xcbf29ce484222325);
        assert_eq!(hash_bytes(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(hash_bytes(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn child_seeds_are_stable_and_distinct() {
        let a = child_seed(7, "gen", &[3]);
        assert_eq!(a, child_seed(7, "gen", &[3]));
        assert_ne!(a, child_seed(7, "gen", &[4]));
        assert_ne!(a, child_seed(7, "eval", &[3]));
        assert_ne!(a, child_seed(8, "gen", &[3]));
    }

    #[test]
    fn label_separates_index_concatenation() {
        // ("ab", [1]) and ("a", [?]) style collisions: the label bytes are
        // hashed before the indices, so moving a byte across the boundary
        // changes the digest.
        assert_ne!(child_seed(0, "ab", &[]), child_seed(0, "a", &[b'b' as u64]));
    }

    #[test]
    fn rng_streams_are_reproducible() {
        let mut r1 = child_rng(42, "x", &[0]);
        let mut r2 = child_rng(42, "x", &[0]);
        for _ in 0..16 {
            assert_eq!(r1.gen::<u64>(), r2.gen::<u64>());
        }
    }
}
