//! Embedding vectors, interchangeable providers, and the embeddings file format.

mod bow;
mod file;
mod http;

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub use bow::{HashedBowProvider, DEFAULT_BOW_DIM};
pub use file::FileProvider;
pub use http::{HttpProvider, HttpProviderConfig, DEFAULT_BATCH_SIZE};

/// A fixed-length vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("embedding vector has no entries".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "embedding entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// One vector per issue id, in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    model_name: String,
    dim: usize,
    vectors: IndexMap<String, EmbeddingVector>,
}

impl EmbeddingSet {
    /// Rejects empty sets, mixed dimensions and zero vectors.
    pub fn new(
        model_name: impl Into<String>,
        vectors: IndexMap<String, EmbeddingVector>,
    ) -> Result<Self> {
        let dim = match vectors.values().next() {
            Some(v) => v.dim(),
            None => return Err(Error::Validation("embedding set is empty".into())),
        };
        for (id, v) in &vectors {
            if v.dim() != dim {
                return Err(Error::Format(format!(
                    "vector for {id:?} has dim {}, expected {dim}",
                    v.dim()
                )));
            }
            if v.norm() == 0.0 {
                return Err(Error::Validation(format!(
                    "zero embedding vector for {id:?}"
                )));
            }
        }
        Ok(EmbeddingSet {
            model_name: model_name.into(),
            dim,
            vectors,
        })
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingVector> {
        self.vectors.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector)> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Reorders the set to follow `corpus`. The key sets must be identical.
    pub fn aligned_to(&self, corpus: &Corpus) -> Result<Self> {
        let missing: Vec<&str> = corpus
            .ids()
            .filter(|id| !self.vectors.contains_key(*id))
            .collect();
        let extra: Vec<&str> = self.ids().filter(|id| corpus.get(id).is_none()).collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::Validation(format!(
                "embedding ids differ from corpus ids: missing {missing:?}, unexpected {extra:?}"
            )));
        }
        let vectors = corpus
            .ids()
            .map(|id| (id.to_string(), self.vectors[id].clone()))
            .collect();
        Ok(EmbeddingSet {
            model_name: self.model_name.clone(),
            dim: self.dim,
            vectors,
        })
    }
}

/// An `(id, text)` pair handed to a provider.
#[derive(Debug, Clone, Copy)]
pub struct EmbedItem<'a> {
    pub id: &'a str,
    pub text: &'a str,
}

/// Anything that turns issue texts into vectors.
///
/// Implementations must be deterministic for identical inputs and return one
/// vector per item, in item order.
pub trait EmbeddingProvider: Send + Sync {
    fn model_name(&self) -> &str;

    fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<Vec<f64>>>;
}

/// Embeds the canonical text of every issue.
pub fn embed_corpus(corpus: &Corpus, provider: &dyn EmbeddingProvider) -> Result<EmbeddingSet> {
    if corpus.is_empty() {
        return Err(Error::Argument("cannot embed an empty corpus".into()));
    }
    let texts: Vec<String> = corpus.issues.iter().map(|i| i.canonical_text()).collect();
    let items: Vec<EmbedItem<'_>> = corpus
        .issues
        .iter()
        .zip(&texts)
        .map(|(issue, text)| EmbedItem {
            id: &issue.id,
            text,
        })
        .collect();
    let raw = provider.embed(&items)?;
    if raw.len() != items.len() {
        return Err(Error::Provider {
            context: provider.model_name().to_string(),
            message: format!("returned {} vectors for {} texts", raw.len(), items.len()),
        });
    }
    let mut vectors = IndexMap::with_capacity(raw.len());
    for (item, values) in items.iter().zip(raw) {
        let v = EmbeddingVector::new(values)
            .map_err(|e| Error::Validation(format!("issue {:?}: {e}", item.id)))?;
        if v.norm() == 0.0 {
            return Err(Error::Validation(format!(
                "provider returned a zero vector for issue {:?}",
                item.id
            )));
        }
        vectors.insert(item.id.to_string(), v);
    }
    EmbeddingSet::new(provider.model_name(), vectors)
}

#[derive(Serialize, Deserialize)]
struct EmbeddingsFile {
    model_name: String,
    dim: usize,
    vectors: IndexMap<String, Vec<f64>>,
}

pub fn save_embeddings(set: &EmbeddingSet, path: &Path) -> Result<()> {
    fs::write(path, embeddings_to_json(set)).map_err(|e| Error::io(path, e))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    embeddings_from_json(&raw)
}

pub fn embeddings_to_json(set: &EmbeddingSet) -> String {
    let file = EmbeddingsFile {
        model_name: set.model_name.clone(),
        dim: set.dim,
        vectors: set
            .vectors
            .iter()
            .map(|(k, v)| (k.clone(), v.0.clone()))
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("embedding set serializes");
    out.push('\n');
    out
}

pub fn embeddings_from_json(raw: &[u8]) -> Result<EmbeddingSet> {
    let file: EmbeddingsFile =
        serde_json::from_slice(raw).map_err(|e| Error::Format(format!("embeddings JSON: {e}")))?;
    if file.dim == 0 {
        return Err(Error::Format("embeddings file declares dim 0".into()));
    }
    let mut vectors = IndexMap::with_capacity(file.vectors.len());
    for (id, values) in file.vectors {
        if values.len() != file.dim {
            return Err(Error::Format(format!(
                "vector for {id:?} has {} entries, file declares dim {}",
                values.len(),
                file.dim
            )));
        }
        let v = EmbeddingVector::new(values)
            .map_err(|e| Error::Validation(format!("issue {id:?}: {e}")))?;
        vectors.insert(id, v);
    }
    EmbeddingSet::new(file.model_name, vectors)
}
