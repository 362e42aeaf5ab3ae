//! Grouping of expert-written issue statements by semantic similarity.
//!
//! Two pipelines share one embedding step:
//!
//! * **graph**: every issue points to its most similar issue; the weakly
//!   connected components of that 1-NN graph are the groups and PageRank
//!   orders issues inside each group.
//! * **cluster**: embeddings are reduced (PCA, or imported coordinates) and
//!   clustered with HDBSCAN; unclustered issues are reported as noise.
//!
//! [`compare`] measures how far two groupings agree.

pub mod cli;
pub mod cluster;
pub mod compare;
pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod export;
pub mod graph;
pub mod grouping;
pub mod report;
pub mod similarity;

pub use error::{Error, Result};
