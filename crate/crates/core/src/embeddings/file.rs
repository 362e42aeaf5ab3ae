use std::path::Path;

use crate::error::{Error, Result};

use super::{load_embeddings, EmbedItem, EmbeddingProvider, EmbeddingSet};

/// Serves precomputed vectors from an embeddings file, looked up by issue id.
#[derive(Debug, Clone)]
pub struct FileProvider {
    set: EmbeddingSet,
}

impl FileProvider {
    pub fn open(path: &Path) -> Result<Self> {
        Ok(FileProvider {
            set: load_embeddings(path)?,
        })
    }

    pub fn from_set(set: EmbeddingSet) -> Self {
        FileProvider { set }
    }
}

impl EmbeddingProvider for FileProvider {
    fn model_name(&self) -> &str {
        self.set.model_name()
    }

    fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<Vec<f64>>> {
        items
            .iter()
            .map(|item| {
                self.set
                    .get(item.id)
                    .map(|v| v.values().to_vec())
                    .ok_or_else(|| Error::MissingEmbedding(item.id.to_string()))
            })
            .collect()
    }
}
