use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SimilarityGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankParams {
    pub damping: f64,
    /// Stop once the L1 change between iterates drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tol: 1e-9,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub scores: IndexMap<String, f64>,
    pub iterations: usize,
    /// False when `max_iter` was reached before the tolerance was met.
    pub converged: bool,
}

/// Weighted PageRank by power iteration.
///
/// Node `j` passes its score along its out-edges in proportion to edge
/// weight. A node whose out-weights are not all positive spreads uniformly
/// over its out-edges; a node without out-edges spreads over all nodes.
pub fn pagerank(graph: &SimilarityGraph, params: &PageRankParams) -> Result<PageRankResult> {
    let n = graph.len();
    if n == 0 {
        return Err(Error::Argument("PageRank of an empty graph".into()));
    }
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(Error::Argument(format!(
            "damping must lie in (0, 1), got {}",
            params.damping
        )));
    }
    if params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::Argument(format!(
            "tol must be positive, got {}",
            params.tol
        )));
    }

    let mut out_weight = vec![0.0; n];
    let mut all_positive = vec![true; n];
    let degree = graph.out_degrees();
    for e in graph.edges() {
        out_weight[e.src] += e.weight;
        all_positive[e.src] &= e.weight > 0.0;
    }
    // (src, dst, transition probability)
    let transitions: Vec<(usize, usize, f64)> = graph
        .edges()
        .iter()
        .map(|e| {
            let p = if all_positive[e.src] && out_weight[e.src] > 0.0 {
                e.weight / out_weight[e.src]
            } else {
                1.0 / degree[e.src] as f64
            };
            (e.src, e.dst, p)
        })
        .collect();
    let dangling: Vec<usize> = (0..n).filter(|&i| degree[i] == 0).collect();

    let d = params.damping;
    let base = (1.0 - d) / n as f64;
    let mut rank = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        iterations += 1;
        let dangling_mass: f64 = dangling.iter().map(|&i| rank[i]).sum();
        next.fill(base + d * dangling_mass / n as f64);
        for &(src, dst, p) in &transitions {
            next[dst] += d * rank[src] * p;
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "PageRank did not reach tol {:e} within {} iterations",
            params.tol,
            params.max_iter
        );
    }
    Ok(PageRankResult {
        scores: graph.nodes().iter().cloned().zip(rank).collect(),
        iterations,
        converged,
    })
}
