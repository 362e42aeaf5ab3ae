//! Cluster-based grouping: reduce the embeddings to a few dimensions, then
//! run density clustering on the reduced points.

mod hdbscan;
mod pca;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::grouping::{sort_groups, Group, Grouping, Method};
use crate::similarity::cosine;

pub use hdbscan::{core_distances, mutual_reachability_mst, HdbscanParams, MstEdge};
pub use pca::{reduce_pca, DEFAULT_STAGES};

/// Low-dimensional coordinates per issue id.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCoordinates {
    pub ids: Vec<String>,
    /// One row of `dim` values per id.
    pub coords: Vec<Vec<f64>>,
    pub dim: usize,
    pub reducer: String,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ReducedFile {
    reducer: String,
    dim: usize,
    coords: IndexMap<String, Vec<f64>>,
}

impl ReducedCoordinates {
    pub fn to_json(&self) -> String {
        let file = ReducedFile {
            reducer: self.reducer.clone(),
            dim: self.dim,
            coords: self
                .ids
                .iter()
                .cloned()
                .zip(self.coords.iter().cloned())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("coordinates serialize");
        s.push('\n');
        s
    }

    fn from_json(raw: &[u8]) -> Result<Self> {
        let file: ReducedFile = serde_json::from_slice(raw)
            .map_err(|e| Error::Format(format!("reduced coordinates JSON: {e}")))?;
        if file.dim == 0 {
            return Err(Error::Format("reduced coordinates declare dim 0".into()));
        }
        for (id, row) in &file.coords {
            if row.len() != file.dim {
                return Err(Error::Format(format!(
                    "coordinates for {id:?} have {} entries, expected {}",
                    row.len(),
                    file.dim
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "non-finite coordinate for {id:?}"
                )));
            }
        }
        Ok(ReducedCoordinates {
            ids: file.coords.keys().cloned().collect(),
            coords: file.coords.into_values().collect(),
            dim: file.dim,
            reducer: file.reducer,
            warnings: Vec::new(),
        })
    }

    /// Reorders rows to `ids`; the id sets must be identical.
    pub fn aligned_to(&self, ids: &[String]) -> Result<Self> {
        check_same_ids("reduced coordinates", self.ids.iter(), ids.iter())?;
        let coords = ids
            .iter()
            .map(|id| {
                let i = self
                    .ids
                    .iter()
                    .position(|x| x == id)
                    .expect("checked above");
                self.coords[i].clone()
            })
            .collect();
        Ok(ReducedCoordinates {
            ids: ids.to_vec(),
            coords,
            ..self.clone()
        })
    }
}

fn check_same_ids<'a>(
    what: &str,
    got: impl Iterator<Item = &'a String>,
    expected: impl Iterator<Item = &'a String>,
) -> Result<()> {
    let got: BTreeSet<&str> = got.map(String::as_str).collect();
    let expected: BTreeSet<&str> = expected.map(String::as_str).collect();
    if got != expected {
        let diff: Vec<&str> = got.symmetric_difference(&expected).copied().collect();
        return Err(Error::Validation(format!(
            "{what} ids do not match the corpus; symmetric difference: {diff:?}"
        )));
    }
    Ok(())
}

/// Loads externally computed coordinates (e.g. UMAP output) for the issues in `ids`.
pub fn load_reduced(path: &Path, ids: &[String]) -> Result<ReducedCoordinates> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    ReducedCoordinates::from_json(&raw)?.aligned_to(ids)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Cluster(usize),
    Noise,
}

impl Label {
    pub fn cluster(self) -> Option<usize> {
        match self {
            Label::Cluster(c) => Some(c),
            Label::Noise => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabels {
    pub labels: IndexMap<String, Label>,
    pub params: HdbscanParams,
}

impl ClusterLabels {
    pub fn n_clusters(&self) -> usize {
        self.labels
            .values()
            .filter_map(|l| l.cluster())
            .max()
            .map_or(0, |m| m + 1)
    }
}

/// HDBSCAN on Euclidean distance between reduced coordinates.
///
/// Cluster indices are numbered by the smallest id each cluster contains, so
/// the labelling does not depend on input order.
pub fn hdbscan(coords: &ReducedCoordinates, params: &HdbscanParams) -> Result<ClusterLabels> {
    let raw = hdbscan::cluster_points(&coords.coords, params)?;
    let n_raw = raw.iter().flatten().max().map_or(0, |m| m + 1);
    let mut smallest: Vec<Option<&str>> = vec![None; n_raw];
    for (id, label) in coords.ids.iter().zip(&raw) {
        if let Some(c) = *label {
            let slot = &mut smallest[c];
            if slot.is_none_or(|s| id.as_str() < s) {
                *slot = Some(id);
            }
        }
    }
    let mut order: Vec<usize> = (0..n_raw).collect();
    order.sort_by_key(|&c| smallest[c]);
    let mut renumber = vec![0; n_raw];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }
    let labels = coords
        .ids
        .iter()
        .zip(raw)
        .map(|(id, l)| {
            let label = match l {
                Some(c) => Label::Cluster(renumber[c]),
                None => Label::Noise,
            };
            (id.clone(), label)
        })
        .collect();
    Ok(ClusterLabels {
        labels,
        params: *params,
    })
}

/// One group per cluster; noise ids go to `Grouping::noise`.
///
/// The density clustering yields no ranking of its own, so importance is the
/// member's mean cosine similarity to the rest of its group (negative means
/// count as zero), normalized to sum to 1 within the group.
pub fn group_by_cluster(
    set: &EmbeddingSet,
    reduction: &ReducedCoordinates,
    labels: &ClusterLabels,
) -> Result<Grouping> {
    let set_ids: Vec<String> = set.ids().map(str::to_string).collect();
    check_same_ids("reduced coordinates", reduction.ids.iter(), set_ids.iter())?;
    check_same_ids("cluster labels", labels.labels.keys(), set_ids.iter())?;

    let mut members: Vec<Vec<&str>> = vec![Vec::new(); labels.n_clusters()];
    let mut noise = Vec::new();
    for id in set.ids() {
        match labels.labels[id] {
            Label::Cluster(c) => members[c].push(id),
            Label::Noise => noise.push(id.to_string()),
        }
    }
    noise.sort();

    let mut groups = Vec::with_capacity(members.len());
    for ids in members.into_iter().filter(|m| !m.is_empty()) {
        let mut raw = Vec::with_capacity(ids.len());
        for &a in &ids {
            let va = set.get(a).expect("ids checked");
            let mut total = 0.0;
            for &b in ids.iter().filter(|&&b| b != a) {
                total += cosine(va, set.get(b).expect("ids checked"))?;
            }
            let mean = if ids.len() > 1 {
                total / (ids.len() - 1) as f64
            } else {
                1.0
            };
            raw.push(mean.max(0.0));
        }
        let sum: f64 = raw.iter().sum();
        let scored = ids
            .iter()
            .zip(raw)
            .map(|(id, r)| {
                let s = if sum > 0.0 {
                    r / sum
                } else {
                    1.0 / ids.len() as f64
                };
                (id.to_string(), s)
            })
            .collect();
        groups.push(Group::from_scores(scored));
    }
    sort_groups(&mut groups);
    Ok(Grouping {
        method: Method::Cluster,
        groups,
        noise,
    })
}

/// Where reduced coordinates come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    /// Staged PCA with the given target dimensions.
    Pca { stages: Vec<usize> },
    /// Coordinates read from a reduced-coordinates JSON file.
    External { path: std::path::PathBuf },
}

impl Default for Reducer {
    fn default() -> Self {
        Reducer::Pca {
            stages: DEFAULT_STAGES.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClusterAnalysis {
    pub coords: ReducedCoordinates,
    pub labels: ClusterLabels,
    pub grouping: Grouping,
}

pub fn analyze_cluster(
    set: &EmbeddingSet,
    reducer: &Reducer,
    params: &HdbscanParams,
    seed: u64,
) -> Result<ClusterAnalysis> {
    let coords = match reducer {
        Reducer::Pca { stages } => reduce_pca(set, stages, seed)?,
        Reducer::External { path } => {
            let ids: Vec<String> = set.ids().map(str::to_string).collect();
            load_reduced(path, &ids)?
        }
    };
    let labels = hdbscan(&coords, params)?;
    let grouping = group_by_cluster(set, &coords, &labels)?;
    Ok(ClusterAnalysis {
        coords,
        labels,
        grouping,
    })
}
