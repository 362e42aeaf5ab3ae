use crate::error::{Error, Result};

use super::{EmbedItem, EmbeddingProvider};

pub const DEFAULT_BOW_DIM: usize = 768;

/// Offline embedder: signed feature hashing of lowercase alphanumeric tokens,
/// L2-normalized.
#[derive(Debug, Clone)]
pub struct HashedBowProvider {
    dim: usize,
    seed: u64,
    model_name: String,
}

impl HashedBowProvider {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim < 8 {
            return Err(Error::Argument(format!(
                "bag-of-words dim must be >= 8, got {dim}"
            )));
        }
        Ok(HashedBowProvider {
            dim,
            seed,
            model_name: format!("hashed-bow-{dim}-seed{seed}"),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Bucket index and sign a token contributes to.
    pub fn bucket(&self, token: &str) -> (usize, f64) {
        let h = token_hash(self.seed, token);
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        ((h % self.dim as u64) as usize, sign)
    }

    pub fn embed_text(&self, text: &str) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dim];
        let mut n_tokens = 0usize;
        for token in tokenize(text) {
            let (i, s) = self.bucket(&token);
            v[i] += s;
            n_tokens += 1;
        }
        if n_tokens == 0 {
            return Err(Error::Validation(format!("text {text:?} has no tokens")));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Validation(format!(
                "hashed tokens of {text:?} cancel to a zero vector"
            )));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }
}

/// Lowercased runs of alphanumeric characters.
pub(crate) fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

// FNV-1a over seed and token bytes, then the splitmix64 finalizer so the high
// bit (used as the sign) is well mixed.
fn token_hash(seed: u64, token: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in seed.to_le_bytes().iter().chain(token.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(PRIME);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

impl EmbeddingProvider for HashedBowProvider {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<Vec<f64>>> {
        items
            .iter()
            .map(|item| {
                self.embed_text(item.text)
                    .map_err(|e| Error::Validation(format!("issue {:?}: {e}", item.id)))
            })
            .collect()
    }
}
