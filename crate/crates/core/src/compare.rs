//! Agreement between two groupings: set overlap, best-match analysis,
//! size histograms and the adjusted Rand index.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::Grouping;

/// `|a ∩ b| / max(|a|, |b|)`.
pub fn overlap<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("overlap of an empty set".into()));
    }
    let shared = a.intersection(b).count();
    Ok(shared as f64 / a.len().max(b.len()) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestMatch {
    /// Index into the first grouping's groups.
    pub group_a: usize,
    /// Index of the best-overlapping group of the second grouping; `None`
    /// when it has no groups.
    pub group_b: Option<usize>,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub method_a: String,
    pub method_b: String,
    pub best_matches: Vec<BestMatch>,
    pub size_histogram_a: BTreeMap<usize, usize>,
    pub size_histogram_b: BTreeMap<usize, usize>,
    /// Mean of `best_matches[*].overlap`; 0 when the first grouping has no groups.
    pub mean_best_overlap: f64,
    pub noise_a: Vec<String>,
    pub noise_b: Vec<String>,
}

fn histogram(g: &Grouping) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for group in &g.groups {
        *h.entry(group.len()).or_insert(0) += 1;
    }
    h
}

/// For every group of `a`, the group of `b` it overlaps most.
///
/// Noise ids take no part in the overlaps and are listed separately. Equal
/// overlaps resolve to the candidate group with the smallest member id.
pub fn best_match_report(a: &Grouping, b: &Grouping) -> Result<OverlapReport> {
    let (ua, ub) = (a.universe(), b.universe());
    if ua != ub {
        let diff: Vec<&str> = ua.symmetric_difference(&ub).copied().collect();
        return Err(Error::Validation(format!(
            "groupings cover different ids; symmetric difference: {diff:?}"
        )));
    }
    let sets_b: Vec<BTreeSet<&str>> = b.groups.iter().map(|g| g.id_set()).collect();
    let mut best_matches = Vec::with_capacity(a.groups.len());
    for (ia, group) in a.groups.iter().enumerate() {
        let sa = group.id_set();
        let mut best: Option<(usize, f64)> = None;
        for (ib, sb) in sets_b.iter().enumerate() {
            let o = overlap(&sa, sb)?;
            let better = match best {
                None => true,
                Some((cur, co)) => o > co || (o == co && sets_b[ib].first() < sets_b[cur].first()),
            };
            if better {
                best = Some((ib, o));
            }
        }
        best_matches.push(BestMatch {
            group_a: ia,
            group_b: best.map(|(i, _)| i),
            overlap: best.map_or(0.0, |(_, o)| o),
        });
    }
    let mean_best_overlap = if best_matches.is_empty() {
        0.0
    } else {
        best_matches.iter().map(|m| m.overlap).sum::<f64>() / best_matches.len() as f64
    };
    Ok(OverlapReport {
        method_a: a.method.to_string(),
        method_b: b.method.to_string(),
        best_matches,
        size_histogram_a: histogram(a),
        size_histogram_b: histogram(b),
        mean_best_overlap,
        noise_a: a.noise.clone(),
        noise_b: b.noise.clone(),
    })
}

impl OverlapReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(raw: &[u8]) -> Result<Self> {
        serde_json::from_slice(raw).map_err(|e| Error::Format(format!("overlap report JSON: {e}")))
    }

    /// `size,count_a,count_b` rows over every size present in either grouping.
    pub fn histogram_csv(&self) -> String {
        let sizes: BTreeSet<usize> = self
            .size_histogram_a
            .keys()
            .chain(self.size_histogram_b.keys())
            .copied()
            .collect();
        let mut out = String::from("size,count_a,count_b\n");
        for s in sizes {
            let _ = writeln!(
                out,
                "{s},{},{}",
                self.size_histogram_a.get(&s).copied().unwrap_or(0),
                self.size_histogram_b.get(&s).copied().unwrap_or(0)
            );
        }
        out
    }

    pub fn markdown(&self, a: &Grouping, b: &Grouping) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# Grouping comparison: {} vs {}\n",
            self.method_a, self.method_b
        );
        let _ = writeln!(
            out,
            "{} groups ({}) vs {} groups ({}); mean best-match overlap {:.3}\n",
            a.groups.len(),
            self.method_a,
            b.groups.len(),
            self.method_b,
            self.mean_best_overlap
        );
        let _ = writeln!(out, "| group A | size | best group B | size | overlap |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for m in &self.best_matches {
            let ga = &a.groups[m.group_a];
            let (gb_label, gb_size) = match m.group_b {
                Some(i) => (i.to_string(), b.groups[i].len().to_string()),
                None => ("-".to_string(), "-".to_string()),
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {:.3} |",
                m.group_a,
                ga.len(),
                gb_label,
                gb_size,
                m.overlap
            );
        }
        let _ = writeln!(out, "\n## Group sizes\n");
        let _ = writeln!(out, "| size | count A | count B |");
        let _ = writeln!(out, "|---|---|---|");
        for line in self.histogram_csv().lines().skip(1) {
            let _ = writeln!(out, "| {} |", line.replace(',', " | "));
        }
        if !self.noise_a.is_empty() || !self.noise_b.is_empty() {
            let _ = writeln!(out, "\n## Unassigned\n");
            let _ = writeln!(out, "- A: {}", self.noise_a.join(", "));
            let _ = writeln!(out, "- B: {}", self.noise_b.join(", "));
        }
        out
    }
}

fn pairs(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same ids.
///
/// When the chance-corrected denominator vanishes (both partitions trivial in
/// the same way) the partitions are identical and 1.0 is returned.
pub fn adjusted_rand_index<A, B>(a: &IndexMap<String, A>, b: &IndexMap<String, B>) -> Result<f64>
where
    A: Eq + Hash + Clone,
    B: Eq + Hash + Clone,
{
    if a.len() != b.len() || a.keys().any(|k| !b.contains_key(k)) {
        let ka: BTreeSet<&String> = a.keys().collect();
        let kb: BTreeSet<&String> = b.keys().collect();
        let diff: Vec<&&String> = ka.symmetric_difference(&kb).collect();
        return Err(Error::Validation(format!(
            "labelings cover different ids; symmetric difference: {diff:?}"
        )));
    }
    let n = a.len() as u64;
    if n < 2 {
        return Ok(1.0);
    }
    let mut table: HashMap<(A, B), u64> = HashMap::new();
    let mut rows: HashMap<A, u64> = HashMap::new();
    let mut cols: HashMap<B, u64> = HashMap::new();
    for (id, la) in a {
        let lb = &b[id];
        *table.entry((la.clone(), lb.clone())).or_insert(0) += 1;
        *rows.entry(la.clone()).or_insert(0) += 1;
        *cols.entry(lb.clone()).or_insert(0) += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(n);
    let max_index = (sum_a + sum_b) / 2.0;
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// ARI of a grouping against reference labels, over the grouping's
/// non-noise ids only.
pub fn grouping_ari<B: Eq + Hash + Clone>(
    g: &Grouping,
    reference: &IndexMap<String, B>,
) -> Result<f64> {
    let labels = g.labels();
    let mut restricted = IndexMap::with_capacity(labels.len());
    for id in labels.keys() {
        let r = reference
            .get(id)
            .ok_or_else(|| Error::Validation(format!("reference has no label for {id:?}")))?;
        restricted.insert(id.clone(), r.clone());
    }
    adjusted_rand_index(&labels, &restricted)
}
