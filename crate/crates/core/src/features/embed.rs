use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::TokenSequence;

/// Default width of the hashing embedder.
pub const DEFAULT_HASHING_DIM: usize = 64;

/// Fixed-length dense representation of one summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Maps preprocessed summaries to vectors of a fixed, backend-specific width.
pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;

    /// Short identifier recorded in saved models and result files.
    fn identity(&self) -> String;

    fn embed_batch(&self, docs: &[TokenSequence]) -> Result<Vec<EmbeddingVector>>;

    fn embed(&self, tokens: &TokenSequence) -> Result<EmbeddingVector> {
        let mut out = self.embed_batch(std::slice::from_ref(tokens))?;
        out.pop()
            .ok_or_else(|| Error::Protocol("backend returned no vector".into()))
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const SIGN_BASIS: u64 = FNV_OFFSET ^ 0x9e37_79b9_7f4a_7c15;

fn fnv1a(basis: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(basis, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Model-free embedder based on signed feature hashing.
///
/// Each token adds `±1` to bucket `fnv1a64(token) mod dim`. The sign is `+1`
/// when the top bit of a second FNV-1a-64 hash, started from the basis
/// `0xcbf29ce484222325 ^ 0x9e3779b97f4a7c15`, is clear and `-1` otherwise.
/// The sum is L2-normalized; an all-zero sum stays zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingEmbedder {
    dim: usize,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        Ok(HashingEmbedder { dim })
    }

    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a(FNV_OFFSET, token.as_bytes()) % self.dim as u64) as usize
    }

    pub fn sign(&self, token: &str) -> f64 {
        if fnv1a(SIGN_BASIS, token.as_bytes()) >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn embed_tokens(&self, tokens: &TokenSequence) -> EmbeddingVector {
        let mut v = vec![0.0; self.dim];
        for t in tokens.tokens() {
            v[self.bucket(t)] += self.sign(t);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        EmbeddingVector(v)
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder {
            dim: DEFAULT_HASHING_DIM,
        }
    }
}

impl Embedder for HashingEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn identity(&self) -> String {
        format!("hashing-fnv1a/{}", self.dim)
    }

    fn embed_batch(&self, docs: &[TokenSequence]) -> Result<Vec<EmbeddingVector>> {
        Ok(docs.iter().map(|d| self.embed_tokens(d)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(tokens: &[&str]) -> TokenSequence {
        TokenSequence(tokens.iter().map(|s| s.to_string()).collect())
    }

    // Independent FNV-1a reference, byte by byte.
    fn reference_fnv(basis: u64, s: &str) -> u64 {
        let mut h = basis;
        for b in s.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(1_099_511_628_211);
        }
        h
    }

    #[test]
    fn fnv_known_vectors() {
        assert_eq!(fnv1a(FNV_OFFSET, b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(FNV_OFFSET, b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(FNV_OFFSET, b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn empty_sequence_is_zero_vector() {
        let e = HashingEmbedder::new(64).unwrap();
        assert_eq!(e.embed(&TokenSequence::default()).unwrap(), EmbeddingVector::zeros(64));
    }

    #[test]
    fn repeatable() {
        let e = HashingEmbedder::default();
        let s = seq(&["crash", "window", "close"]);
        assert_eq!(e.embed(&s).unwrap(), e.embed(&s).unwrap());
    }

    #[test]
    fn sort_name_by_hand() {
        let e = HashingEmbedder::new(64).unwrap();
        let mut expected = vec![0.0; 64];
        for t in ["sort", "name"] {
            let bucket = (reference_fnv(0xcbf29ce484222325, t) % 64) as usize;
            let sign_hash = reference_fnv(0xcbf29ce484222325 ^ 0x9e3779b97f4a7c15, t);
            expected[bucket] += if sign_hash & (1 << 63) == 0 { 1.0 } else { -1.0 };
        }
        let norm: f64 = expected.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in expected.iter_mut() {
            *x /= norm;
        }
        assert_eq!(e.embed(&seq(&["sort", "name"])).unwrap().0, expected);
    }

    #[test]
    fn output_is_unit_norm() {
        let e = HashingEmbedder::new(16).unwrap();
        let v = e.embed(&seq(&["a", "b", "c", "d", "e", "f"])).unwrap();
        let norm: f64 = v.0.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(HashingEmbedder::new(0).is_err());
    }
}
