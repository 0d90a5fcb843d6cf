//! Seed derivation.
//!
//! Every stochastic stage draws from its own ChaCha8 stream. A stream seed is
//! `derive_seed(master, stage, index)`: the stage name is hashed with 64-bit
//! FNV-1a, combined with the master seed and the item index, and finalised with
//! the SplitMix64 mixer. Items of an ensemble therefore get independent streams
//! that do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

pub const STAGE_CORPUS: &str = "corpus";
pub const STAGE_INCREMENTAL: &str = "incremental";
pub const STAGE_WALKS: &str = "walks";
pub const STAGE_ER: &str = "er-baseline";
pub const STAGE_CV: &str = "cv-folds";
pub const STAGE_BALANCE: &str = "balance";
pub const STAGE_SWEEP: &str = "sweep";

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stage: &str, index: u64) -> u64 {
    let a = splitmix64(master ^ fnv1a(stage.as_bytes()));
    splitmix64(a ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn rng_from_seed(seed: u64) -> StageRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stage_rng(master: u64, stage: &str, index: u64) -> StageRng {
    rng_from_seed(derive_seed(master, stage, index))
}
