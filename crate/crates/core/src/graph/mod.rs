//! Graph-based grouping: each issue links to its most similar issue, the
//! weakly connected components of that graph are the groups, and PageRank
//! ranks issues within them.

mod pagerank;

use crate::error::{Error, Result};
use crate::grouping::{sort_groups, Group, Grouping, Method};
use crate::similarity::SimilarityMatrix;

pub use pagerank::{pagerank, PageRankParams, PageRankResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Directed nearest-neighbor graph over issue ids. Edges reference node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    k: usize,
}

impl SimilarityGraph {
    /// Builds a graph from explicit edges, rejecting self-loops, out-of-range
    /// endpoints and weights outside `[-1, 1]`.
    pub fn from_edges(nodes: Vec<String>, edges: Vec<Edge>, k: usize) -> Result<Self> {
        let n = nodes.len();
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::Argument(format!(
                    "edge {e:?} references a missing node"
                )));
            }
            if e.src == e.dst {
                return Err(Error::Argument(format!("self-loop on {:?}", nodes[e.src])));
            }
            if !(-1.0..=1.0).contains(&e.weight) {
                return Err(Error::Argument(format!(
                    "edge weight {} outside [-1, 1]",
                    e.weight
                )));
            }
        }
        Ok(SimilarityGraph { nodes, edges, k })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for e in &self.edges {
            deg[e.src] += 1;
        }
        deg
    }
}

/// Links every node to its `k` most similar other nodes.
pub fn build_knn_graph(matrix: &SimilarityMatrix, k: usize) -> Result<SimilarityGraph> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::Argument(format!(
            "graph needs at least 2 issues, got {n}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::Argument(format!(
            "k must lie in [1, {}], got {k}",
            n - 1
        )));
    }
    let edges = (0..n)
        .flat_map(|i| {
            matrix.nearest(i, k).into_iter().map(move |j| Edge {
                src: i,
                dst: j,
                weight: matrix.get(i, j),
            })
        })
        .collect();
    Ok(SimilarityGraph {
        nodes: matrix.ids().to_vec(),
        edges,
        k,
    })
}

pub fn build_1nn_graph(matrix: &SimilarityMatrix) -> Result<SimilarityGraph> {
    build_knn_graph(matrix, 1)
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Node-index components of the graph with edge directions ignored.
fn component_indices(graph: &SimilarityGraph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut ds = DisjointSet::new(n);
    for e in &graph.edges {
        ds.union(e.src, e.dst);
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = ds.find(i);
        by_root[r].push(i);
    }
    by_root.retain(|c| !c.is_empty());
    by_root
}

/// Weakly connected components as sorted id lists, largest first, then by
/// smallest id.
pub fn weakly_connected_components(graph: &SimilarityGraph) -> Vec<Vec<String>> {
    let mut comps: Vec<Vec<String>> = component_indices(graph)
        .into_iter()
        .map(|c| {
            let mut ids: Vec<String> = c.into_iter().map(|i| graph.nodes[i].clone()).collect();
            ids.sort();
            ids
        })
        .collect();
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    comps
}

/// Everything the graph method produces: the graph itself, PageRank output
/// and the resulting grouping.
#[derive(Debug, Clone)]
pub struct GraphAnalysis {
    pub graph: SimilarityGraph,
    pub pagerank: PageRankResult,
    pub grouping: Grouping,
}

pub fn analyze_graph(matrix: &SimilarityMatrix, params: &PageRankParams) -> Result<GraphAnalysis> {
    let graph = build_1nn_graph(matrix)?;
    let pr = pagerank(&graph, params)?;
    let mut groups: Vec<Group> = weakly_connected_components(&graph)
        .into_iter()
        .map(|ids| {
            Group::from_scores(
                ids.into_iter()
                    .map(|id| {
                        let s = pr.scores[&id];
                        (id, s)
                    })
                    .collect(),
            )
        })
        .collect();
    sort_groups(&mut groups);
    Ok(GraphAnalysis {
        graph,
        pagerank: pr,
        grouping: Grouping {
            method: Method::Graph,
            groups,
            noise: Vec::new(),
        },
    })
}

/// One group per weakly connected component of the 1-NN graph, members
/// ranked by PageRank computed over the whole graph.
pub fn group_by_graph(matrix: &SimilarityMatrix) -> Result<Grouping> {
    Ok(analyze_graph(matrix, &PageRankParams::default())?.grouping)
}
