//! Reference implementations used as test oracles. Each one is the most
//! direct O(n²) or O(n³) formulation, written without the library's helpers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use consolidation::embeddings::{EmbeddingSet, EmbeddingVector};
use indexmap::IndexMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i:03}")).collect()
}

pub fn set_from_rows(rows: &[Vec<f64>]) -> EmbeddingSet {
    let vectors = ids(rows.len())
        .into_iter()
        .zip(rows)
        .map(|(id, r)| (id, EmbeddingVector::new(r.clone()).unwrap()))
        .collect();
    EmbeddingSet::new("oracle", vectors).unwrap()
}

pub fn random_unit_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

pub fn brute_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Index of each row's most similar other row; ties go to the smaller index,
/// which is also the smaller id for ids generated by `ids`.
pub fn brute_nearest(rows: &[Vec<f64>]) -> Vec<usize> {
    (0..rows.len())
        .map(|i| {
            let mut best = usize::MAX;
            let mut best_s = f64::NEG_INFINITY;
            for j in 0..rows.len() {
                if j == i {
                    continue;
                }
                let s = brute_cosine(&rows[i], &rows[j]);
                if s > best_s {
                    best = j;
                    best_s = s;
                }
            }
            best
        })
        .collect()
}

/// PageRank by dense matrix-vector power iteration with the same update and
/// stopping rule as the library: x' = (1-d)/n + d * (P^T x + dangling/n),
/// stop when the L1 change drops below `tol`.
pub fn dense_pagerank(
    n: usize,
    edges: &[(usize, usize, f64)],
    d: f64,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let p = transition(n, edges);
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let next = step(&p, &x, d);
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if change < tol {
            break;
        }
    }
    x
}

/// The exact PageRank vector: solves (I - d P^T) x = (1-d)/n by Gaussian
/// elimination with partial pivoting. Only valid without dangling nodes.
pub fn exact_pagerank(n: usize, edges: &[(usize, usize, f64)], d: f64) -> Vec<f64> {
    let p = transition(n, edges);
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = if i == j { 1.0 } else { 0.0 } - d * p[j][i];
        }
        a[i][n] = (1.0 - d) / n as f64;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

fn transition(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; n]; n];
    let mut total = vec![0.0; n];
    let mut count = vec![0usize; n];
    let mut positive = vec![true; n];
    for &(s, _, w) in edges {
        total[s] += w;
        count[s] += 1;
        positive[s] &= w > 0.0;
    }
    for &(s, t, w) in edges {
        p[s][t] += if positive[s] {
            w / total[s]
        } else {
            1.0 / count[s] as f64
        };
    }
    p
}

fn step(p: &[Vec<f64>], x: &[f64], d: f64) -> Vec<f64> {
    let n = x.len();
    let dangling: f64 = (0..n)
        .filter(|&j| p[j].iter().all(|&v| v == 0.0))
        .map(|j| x[j])
        .sum();
    (0..n)
        .map(|i| {
            let inflow: f64 = (0..n).map(|j| p[j][i] * x[j]).sum();
            (1.0 - d) / n as f64 + d * (inflow + dangling / n as f64)
        })
        .collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Total weight of a minimum spanning tree of the mutual reachability graph,
/// by Kruskal over all pairs. Core distance is the distance to the
/// `min_samples`-th nearest point counting the point itself.
pub fn kruskal_mrd_weight(points: &[Vec<f64>], min_samples: usize) -> f64 {
    let n = points.len();
    let core: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| euclid(&points[i], &points[j])).collect();
            d.sort_by(f64::total_cmp);
            d[min_samples - 1]
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = euclid(&points[i], &points[j]).max(core[i]).max(core[j]);
            pairs.push((m, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    let mut total = 0.0;
    for (w, i, j) in pairs {
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            total += w;
        }
    }
    total
}

/// Adjusted Rand index by explicit pair counting over all element pairs.
pub fn brute_ari<A: PartialEq, B: PartialEq>(a: &[A], b: &[B]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut total) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            total += 1.0;
            if sa && sb {
                both += 1.0;
            }
            if sa {
                only_a += 1.0;
            }
            if sb {
                only_b += 1.0;
            }
        }
    }
    let expected = only_a * only_b / total;
    let max = (only_a + only_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

/// A partition as a set of sorted member lists, independent of label names.
pub fn partition<L: Ord + Clone>(labels: &IndexMap<String, L>) -> BTreeSet<Vec<String>> {
    let mut by: BTreeMap<L, Vec<String>> = BTreeMap::new();
    for (id, l) in labels {
        by.entry(l.clone()).or_default().push(id.clone());
    }
    by.into_values()
        .map(|mut v| {
            v.sort();
            v
        })
        .collect()
}

/// Three isotropic 2-d Gaussian blobs of `per` points with standard
/// deviation `sigma`, centred on a triangle with unit-or-longer sides.
pub fn blobs_2d(rng: &mut ChaCha8Rng, per: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let side: f64 = rng.random_range(1.0..2.0);
    let r = side / 3f64.sqrt();
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for c in 0..3 {
        let a = angle + c as f64 * std::f64::consts::TAU / 3.0;
        let (cx, cy) = (r * a.cos(), r * a.sin());
        for _ in 0..per {
            points.push(vec![cx + normal.sample(rng), cy + normal.sample(rng)]);
            labels.push(c);
        }
    }
    (points, labels)
}
