//! Per-question deterministic RNG streams. Every random decision in the
//! pipeline draws from a stream derived from (run seed, question id, domain
//! tag), so interrupting and resuming a run can never shift the randomness
//! of unrelated questions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Majority-vote tie breaking.
pub const DOMAIN_VOTE: u8 = 0x01;
/// Few-shot exemplar selection during evaluation.
pub const DOMAIN_EVAL: u8 = 0x02;

/// Seed layout: bytes 0..8 run seed (LE), 8..16 question id (LE), byte 16
/// the domain tag, rest zero.
pub fn question_rng(run_seed: u64, question_id: u64, domain: u8) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&run_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&question_id.to_le_bytes());
    seed[16] = domain;
    ChaCha8Rng::from_seed(seed)
}
