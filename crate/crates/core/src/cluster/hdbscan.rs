//! Exact HDBSCAN over Euclidean distance.
//!
//! Steps: core distances, mutual reachability, Prim MST, single-linkage
//! hierarchy, condensed tree, excess-of-mass cluster selection.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    /// Neighborhood size for core distances, counting the point itself.
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams {
            min_cluster_size: 3,
            min_samples: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = euclidean(&points[i], &points[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Distance from each point to its `min_samples`-th nearest point, the point
/// itself counting as the first.
pub fn core_distances(points: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    core_from_matrix(&distance_matrix(points), min_samples)
}

fn core_from_matrix(dist: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    dist.iter()
        .map(|row| {
            let mut sorted = row.clone();
            sorted.sort_by(f64::total_cmp);
            sorted[min_samples.clamp(1, sorted.len()) - 1]
        })
        .collect()
}

/// Minimum spanning tree of the mutual reachability graph (dense Prim).
pub fn mutual_reachability_mst(points: &[Vec<f64>], min_samples: usize) -> Vec<MstEdge> {
    let dist = distance_matrix(points);
    let core = core_from_matrix(&dist, min_samples);
    prim(&dist, &core)
}

fn prim(dist: &[Vec<f64>], core: &[f64]) -> Vec<MstEdge> {
    let n = dist.len();
    let mrd = |i: usize, j: usize| dist[i][j].max(core[i]).max(core[j]);
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let w = mrd(current, j);
            if w < best[j] {
                best[j] = w;
                from[j] = current;
            }
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push(MstEdge {
            a: from[next],
            b: next,
            weight: best[next],
        });
        current = next;
    }
    edges
}

/// Internal dendrogram node `n + i` merges `left` and `right` at `distance`.
#[derive(Debug, Clone, Copy)]
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

fn single_linkage(n: usize, mst: &[MstEdge]) -> Vec<Merge> {
    let mut edges = mst.to_vec();
    edges.sort_by(|x, y| {
        x.weight
            .total_cmp(&y.weight)
            .then(x.a.min(x.b).cmp(&y.a.min(y.b)))
            .then(x.a.max(x.b).cmp(&y.a.max(y.b)))
    });
    // union-find whose roots remember the dendrogram node they represent
    let mut parent: Vec<usize> = (0..n).collect();
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for e in edges {
        let ra = find(&mut parent, e.a);
        let rb = find(&mut parent, e.b);
        let merged = size[ra] + size[rb];
        merges.push(Merge {
            left: node_of[ra],
            right: node_of[rb],
            distance: e.weight,
            size: merged,
        });
        parent[rb] = ra;
        size[ra] = merged;
        node_of[ra] = n + merges.len() - 1;
    }
    merges
}

/// Edge of the condensed tree. `child < n` is a point, otherwise a cluster.
#[derive(Debug, Clone, Copy)]
struct CondensedEdge {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
}

fn condense(n: usize, merges: &[Merge], min_cluster_size: usize) -> Vec<CondensedEdge> {
    // Zero distances would give infinite lambda; cap so stability sums stay finite.
    let lambda_cap = f64::MAX / (4.0 * n as f64);
    let lambda_of = |d: f64| {
        if d > 0.0 {
            (1.0 / d).min(lambda_cap)
        } else {
            lambda_cap
        }
    };
    let size_of = |node: usize| if node < n { 1 } else { merges[node - n].size };
    let leaves = |node: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                stack.push(merges[x - n].right);
                stack.push(merges[x - n].left);
            }
        }
        out
    };

    // Merges at one identical distance form a single multi-way split.
    let parts = |node: usize| -> Vec<usize> {
        let level = merges[node - n].distance;
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x >= n && merges[x - n].distance == level {
                stack.push(merges[x - n].right);
                stack.push(merges[x - n].left);
            } else {
                out.push(x);
            }
        }
        out
    };

    let root = n + merges.len() - 1;
    let mut tree = Vec::new();
    let mut next_label = n + 1;
    // (dendrogram node, cluster label it belongs to)
    let mut queue = VecDeque::from([(root, n)]);
    while let Some((node, label)) = queue.pop_front() {
        if node < n {
            continue;
        }
        let lambda = lambda_of(merges[node - n].distance);
        let (big, small): (Vec<usize>, Vec<usize>) = parts(node)
            .into_iter()
            .partition(|&p| size_of(p) >= min_cluster_size);
        for p in small.into_iter().flat_map(&leaves) {
            tree.push(CondensedEdge {
                parent: label,
                child: p,
                lambda,
                size: 1,
            });
        }
        if let [only] = big[..] {
            queue.push_back((only, label));
        } else {
            for child in big {
                tree.push(CondensedEdge {
                    parent: label,
                    child: next_label,
                    lambda,
                    size: size_of(child),
                });
                queue.push_back((child, next_label));
                next_label += 1;
            }
        }
    }
    tree
}

/// Clusters chosen by excess of mass, as condensed-tree labels.
fn select_clusters(n: usize, tree: &[CondensedEdge]) -> Vec<usize> {
    let max_label = tree
        .iter()
        .map(|e| e.parent.max(e.child))
        .max()
        .unwrap_or(n);
    let n_clusters = max_label + 1 - n;
    let idx = |label: usize| label - n;

    let mut birth = vec![0.0; n_clusters];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[idx(e.child)] = e.lambda;
        children[idx(e.parent)].push(e.child);
    }
    let mut stability = vec![0.0; n_clusters];
    for e in tree {
        stability[idx(e.parent)] += (e.lambda - birth[idx(e.parent)]) * e.size as f64;
    }

    let mut selected = vec![false; n_clusters];
    // Children always carry larger labels than their parent; the root (label n) is never selected.
    for label in (n + 1..=max_label).rev() {
        let c = idx(label);
        if children[c].is_empty() {
            selected[c] = true;
            continue;
        }
        let subtree: f64 = children[c].iter().map(|&ch| stability[idx(ch)]).sum();
        if subtree > stability[c] {
            stability[c] = subtree;
        } else {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(x) = stack.pop() {
                selected[idx(x)] = false;
                stack.extend(children[idx(x)].iter().copied());
            }
        }
    }
    (n + 1..=max_label).filter(|&l| selected[idx(l)]).collect()
}

/// Cluster assignment per point index, `None` for noise. Cluster numbers
/// are arbitrary but contiguous from 0.
pub(crate) fn cluster_points(
    points: &[Vec<f64>],
    params: &HdbscanParams,
) -> Result<Vec<Option<usize>>> {
    let n = points.len();
    if params.min_cluster_size < 2 {
        return Err(Error::Argument(format!(
            "min_cluster_size must be >= 2, got {}",
            params.min_cluster_size
        )));
    }
    if params.min_samples == 0 {
        return Err(Error::Argument("min_samples must be >= 1".into()));
    }
    if n < params.min_cluster_size {
        return Err(Error::Argument(format!(
            "{n} points is fewer than min_cluster_size {}",
            params.min_cluster_size
        )));
    }
    if params.min_samples > n {
        return Err(Error::Argument(format!(
            "min_samples {} exceeds the number of points {n}",
            params.min_samples
        )));
    }
    if let Some(d) = points.first().map(Vec::len) {
        if points
            .iter()
            .any(|p| p.len() != d || p.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Argument(
                "points must share one dim and be finite".into(),
            ));
        }
    }

    let dist = distance_matrix(points);
    // Fully coincident data has no density structure to split: one cluster.
    if dist.iter().flatten().all(|&d| d == 0.0) {
        return Ok(vec![Some(0); n]);
    }
    let core = core_from_matrix(&dist, params.min_samples);
    let mst = prim(&dist, &core);
    let merges = single_linkage(n, &mst);
    let tree = condense(n, &merges, params.min_cluster_size);
    let chosen = select_clusters(n, &tree);

    let mut parent_of = vec![usize::MAX; tree.iter().map(|e| e.child).max().unwrap_or(0) + 1];
    for e in &tree {
        parent_of[e.child] = e.parent;
    }
    let cluster_number = |label: usize| chosen.iter().position(|&c| c == label);
    Ok((0..n)
        .map(|p| {
            let mut label = parent_of[p];
            while label != usize::MAX {
                if let Some(k) = cluster_number(label) {
                    return Some(k);
                }
                label = parent_of.get(label).copied().unwrap_or(usize::MAX);
            }
            None
        })
        .collect())
}
