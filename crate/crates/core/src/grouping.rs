//! The result of either grouping method and its JSON form.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Graph,
    Cluster,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Graph => "graph",
            Method::Cluster => "cluster",
        })
    }
}

/// A set of issue ids with a per-id importance score. `ids` is ordered by
/// descending importance, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub ids: Vec<String>,
    pub importance: IndexMap<String, f64>,
}

impl Group {
    /// Builds a group from scores, ordering members by descending score.
    pub fn from_scores(mut scored: Vec<(String, f64)>) -> Self {
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Group {
            ids: scored.iter().map(|(id, _)| id.clone()).collect(),
            importance: scored.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn smallest_id(&self) -> Option<&str> {
        self.ids.iter().map(String::as_str).min()
    }

    pub fn id_set(&self) -> BTreeSet<&str> {
        self.ids.iter().map(String::as_str).collect()
    }
}

/// A partition of issue ids into groups plus unassigned noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub method: Method,
    pub groups: Vec<Group>,
    pub noise: Vec<String>,
}

impl Grouping {
    /// Checks that groups are non-empty, pairwise disjoint, disjoint from
    /// noise, and that every group's importance keys match its ids.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (g, group) in self.groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::Validation(format!("group {g} is empty")));
            }
            if group.importance.len() != group.ids.len()
                || group
                    .ids
                    .iter()
                    .any(|id| !group.importance.contains_key(id))
            {
                return Err(Error::Validation(format!(
                    "group {g}: importance keys do not match member ids"
                )));
            }
            for id in &group.ids {
                if !seen.insert(id.as_str()) {
                    return Err(Error::Validation(format!("id {id:?} assigned twice")));
                }
            }
        }
        for id in &self.noise {
            if !seen.insert(id.as_str()) {
                return Err(Error::Validation(format!(
                    "noise id {id:?} also appears elsewhere"
                )));
            }
        }
        Ok(())
    }

    /// Every id, grouped or noise.
    pub fn universe(&self) -> BTreeSet<&str> {
        self.groups
            .iter()
            .flat_map(|g| g.ids.iter())
            .chain(&self.noise)
            .map(String::as_str)
            .collect()
    }

    /// Group index per grouped id; noise ids are absent.
    pub fn labels(&self) -> IndexMap<String, usize> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(g, group)| group.ids.iter().map(move |id| (id.clone(), g)))
            .collect()
    }

    pub fn importance_of(&self, id: &str) -> Option<f64> {
        self.groups
            .iter()
            .find_map(|g| g.importance.get(id).copied())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("grouping serializes");
        s.push('\n');
        s
    }

    pub fn from_json(raw: &[u8]) -> Result<Self> {
        let g: Grouping = serde_json::from_slice(raw)
            .map_err(|e| Error::Format(format!("grouping JSON: {e}")))?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&raw)
    }
}

/// Orders groups by descending size, then ascending smallest id.
pub(crate) fn sort_groups(groups: &mut [Group]) {
    groups.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.smallest_id().cmp(&b.smallest_id()))
    });
}
