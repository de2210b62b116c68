//! Offline fallback embedder: hashed bag of tokens.
//!
//! Tokens are lowercased runs of alphanumeric characters. Each token is
//! FNV-1a-hashed; the hash picks a bucket (`hash % dimension`) and a sign
//! (top bit), and the signed counts are L2-normalized. Texts with no
//! alphanumeric characters fall back to hashing the raw text as a single
//! token so every input embeds deterministically.

use crate::embed::{l2_normalize, Embedder};
use crate::error::Result;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub struct HashedBagEmbedder {
    dimension: usize,
}

impl HashedBagEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 1, "dimension must be >= 1");
        HashedBagEmbedder { dimension }
    }

    fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0.0f32; self.dimension];
        let lowered = text.to_lowercase();
        let mut saw_token = false;
        for token in lowered.split(|c: char| !c.is_alphanumeric()) {
            if token.is_empty() {
                continue;
            }
            saw_token = true;
            self.add_token(&mut v, token.as_bytes());
        }
        if !saw_token {
            self.add_token(&mut v, text.as_bytes());
        }
        l2_normalize(&mut v);
        v
    }

    fn add_token(&self, v: &mut [f32], token: &[u8]) {
        let h = fnv1a(token);
        let bucket = (h % self.dimension as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[bucket] += sign;
    }
}

impl Embedder for HashedBagEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}
