//! Seeded generator plumbing. All randomness in the crate flows from
//! explicit seeds through ChaCha8 streams; there is no ambient entropy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub fn hash_seed(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// Seed of the sub-stream `name` under `seed`.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut bytes = seed.to_le_bytes().to_vec();
    bytes.extend_from_slice(name.as_bytes());
    hash_seed(&bytes)
}

pub fn substream(seed: u64, name: &str) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, name))
}

pub fn encode(rng: &StreamRng) -> String {
    serde_json::to_string(rng).expect("generator state serializes")
}

/// Restores a generator from its serialized form. Unparseable text seeds a
/// fresh stream from its hash so every string is a usable state.
pub fn decode(state: &str) -> StreamRng {
    serde_json::from_str(state)
        .unwrap_or_else(|_| StreamRng::seed_from_u64(hash_seed(state.as_bytes())))
}

pub fn seeded_state(seed: u64) -> String {
    encode(&StreamRng::seed_from_u64(seed))
}
