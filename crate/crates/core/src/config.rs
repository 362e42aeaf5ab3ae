//! Run configuration, loaded from a JSON file and overridden by command-line
//! flags.
//!
//! ```json
//! {
//!   "corpus": "issues.csv",
//!   "format": "csv",
//!   "provider": {"kind": "bow", "dim": 768},
//!   "method": "both",
//!   "reducer": {"pca": {"stages": [15, 2]}},
//!   "hdbscan": {"min_cluster_size": 3, "min_samples": 3},
//!   "pagerank": {"damping": 0.85, "tol": 1e-9, "max_iter": 100},
//!   "out": "out",
//!   "seed": 0
//! }
//! ```
//!
//! Every key is optional. The provider is one of `bow`, `file` (with
//! `path`) or `http` (with `url`, `model_name`, `timeout_secs`,
//! `batch_size`).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::cluster::{HdbscanParams, Reducer};
use crate::corpus::{load_corpus, Corpus, CorpusFormat};
use crate::embeddings::{
    EmbeddingProvider, FileProvider, HashedBowProvider, HttpProvider, HttpProviderConfig,
    DEFAULT_BATCH_SIZE, DEFAULT_BOW_DIM,
};
use crate::error::{Error, Result};
use crate::graph::PageRankParams;
use crate::grouping::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodSelection {
    Graph,
    Cluster,
    #[default]
    Both,
}

impl MethodSelection {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodSelection::Graph => vec![Method::Graph],
            MethodSelection::Cluster => vec![Method::Cluster],
            MethodSelection::Both => vec![Method::Graph, Method::Cluster],
        }
    }
}

fn default_bow_dim() -> usize {
    DEFAULT_BOW_DIM
}

fn default_timeout_secs() -> f64 {
    30.0
}

fn default_batch_size() -> usize {
    DEFAULT_BATCH_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProviderConfig {
    /// Hashed bag-of-words vectors, seeded with the run seed.
    Bow {
        #[serde(default = "default_bow_dim")]
        dim: usize,
    },
    /// Precomputed vectors from an embeddings JSON file.
    File { path: PathBuf },
    /// A remote embedding service.
    Http {
        url: String,
        #[serde(default)]
        model_name: String,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: f64,
        #[serde(default = "default_batch_size")]
        batch_size: usize,
    },
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Bow {
            dim: DEFAULT_BOW_DIM,
        }
    }
}

impl ProviderConfig {
    pub fn kind(&self) -> ProviderKind {
        match self {
            ProviderConfig::Bow { .. } => ProviderKind::Bow,
            ProviderConfig::File { .. } => ProviderKind::File,
            ProviderConfig::Http { .. } => ProviderKind::Http,
        }
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn EmbeddingProvider>> {
        Ok(match self {
            ProviderConfig::Bow { dim } => Box::new(HashedBowProvider::new(*dim, seed)?),
            ProviderConfig::File { path } => Box::new(FileProvider::open(path)?),
            ProviderConfig::Http {
                url,
                model_name,
                timeout_secs,
                batch_size,
            } => {
                if !timeout_secs.is_finite() || *timeout_secs <= 0.0 {
                    return Err(Error::Argument(format!(
                        "timeout must be a positive number of seconds, got {timeout_secs}"
                    )));
                }
                Box::new(HttpProvider::new(HttpProviderConfig {
                    base_url: url.clone(),
                    model_name: model_name.clone(),
                    timeout: Duration::from_secs_f64(*timeout_secs),
                    batch_size: *batch_size,
                })?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProviderKind {
    Bow,
    File,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    /// Corpus format; guessed from the file extension when absent.
    pub format: Option<CorpusFormat>,
    pub provider: ProviderConfig,
    pub method: MethodSelection,
    pub reducer: Reducer,
    pub hdbscan: HdbscanParams,
    pub pagerank: PageRankParams,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            format: None,
            provider: ProviderConfig::default(),
            method: MethodSelection::default(),
            reducer: Reducer::default(),
            hdbscan: HdbscanParams::default(),
            pagerank: PageRankParams::default(),
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(raw: &[u8]) -> Result<Self> {
        serde_json::from_slice(raw).map_err(|e| Error::Schema(format!("run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&raw).map_err(|e| match e {
            Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn corpus_format(&self) -> Result<CorpusFormat> {
        let path = self.corpus_path()?;
        match self.format {
            Some(f) => Ok(f),
            None => CorpusFormat::from_path(path).ok_or_else(|| {
                Error::Argument(format!(
                    "cannot tell the format of {} from its extension; set the format explicitly",
                    path.display()
                ))
            }),
        }
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.corpus
            .as_deref()
            .ok_or_else(|| Error::Argument("no corpus given".into()))
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        load_corpus(self.corpus_path()?, self.corpus_format()?)
    }

    /// Rejects an output path that exists but is not a directory.
    pub fn check_out_dir(&self) -> Result<()> {
        match fs::metadata(&self.out) {
            Ok(m) if !m.is_dir() => Err(Error::Argument(format!(
                "output path {} is not a directory",
                self.out.display()
            ))),
            Ok(m) if m.permissions().readonly() => Err(Error::Argument(format!(
                "output directory {} is read-only",
                self.out.display()
            ))),
            _ => Ok(()),
        }
    }
}
