mod common;

use std::collections::BTreeSet;

use common::*;
use consolidation::cluster::{
    hdbscan, mutual_reachability_mst, reduce_pca, HdbscanParams, Label, ReducedCoordinates,
};
use consolidation::embeddings::{embeddings_from_json, embeddings_to_json, EmbeddingVector};
use consolidation::graph::{
    build_1nn_graph, pagerank, weakly_connected_components, Edge, PageRankParams, SimilarityGraph,
};
use consolidation::similarity::{cosine, knn, similarity_matrix};
use indexmap::IndexMap;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn coords(points: Vec<Vec<f64>>) -> ReducedCoordinates {
    let dim = points[0].len();
    ReducedCoordinates {
        ids: ids(points.len()),
        coords: points,
        dim,
        reducer: "test".into(),
        warnings: vec![],
    }
}

fn labels_of(points: &[Vec<f64>], params: &HdbscanParams) -> IndexMap<String, Label> {
    hdbscan(&coords(points.to_vec()), params).unwrap().labels
}

/// Noise points become singletons so partitions can be compared directly.
fn with_singleton_noise(labels: &IndexMap<String, Label>) -> IndexMap<String, String> {
    labels
        .iter()
        .map(|(id, l)| {
            let key = match l {
                Label::Cluster(c) => format!("c{c}"),
                Label::Noise => format!("noise-{id}"),
            };
            (id.clone(), key)
        })
        .collect()
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_scale_invariant(a in vector(8), b in vector(8), c in 0.001f64..1000.0) {
        let va = EmbeddingVector::new(a.clone()).unwrap();
        let vb = EmbeddingVector::new(b.clone()).unwrap();
        let scaled = EmbeddingVector::new(a.iter().map(|x| x * c).collect()).unwrap();
        let ab = cosine(&va, &vb).unwrap();
        prop_assert!((ab - cosine(&vb, &va).unwrap()).abs() <= 1e-12);
        prop_assert!((ab - cosine(&scaled, &vb).unwrap()).abs() <= 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert!((ab - brute_cosine(&a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn embeddings_json_round_trips(rows in prop::collection::vec(vector(5), 1..12)) {
        let set = set_from_rows(&rows);
        let back = embeddings_from_json(embeddings_to_json(&set).as_bytes()).unwrap();
        prop_assert_eq!(back, set);
    }
}

#[test]
fn similarity_matrix_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 3, 7, 20, 50] {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..16).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let m = similarity_matrix(&set_from_rows(&rows)).unwrap();
        for i in 0..n {
            assert_eq!(m.get(i, i), 1.0);
            for j in 0..n {
                if i != j {
                    assert!((m.get(i, j) - brute_cosine(&rows[i], &rows[j])).abs() <= 1e-12);
                }
                assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn knn_is_invariant_under_input_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.random_range(3..30);
        let rows = random_unit_rows(&mut rng, n, 12);
        let names = ids(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let shuffled = consolidation::embeddings::EmbeddingSet::new(
            "oracle",
            order
                .iter()
                .map(|&i| {
                    (
                        names[i].clone(),
                        EmbeddingVector::new(rows[i].clone()).unwrap(),
                    )
                })
                .collect(),
        )
        .unwrap();
        let k = rng.random_range(1..n);
        let a = knn(&similarity_matrix(&set_from_rows(&rows)).unwrap(), k).unwrap();
        let b = knn(&similarity_matrix(&shuffled).unwrap(), k).unwrap();
        for id in &names {
            let la: Vec<&str> = a[id].iter().map(|x| x.id.as_str()).collect();
            let lb: Vec<&str> = b[id].iter().map(|x| x.id.as_str()).collect();
            assert_eq!(la, lb);
        }
    }
}

#[test]
fn one_nn_graph_invariants_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let n = rng.random_range(2..60);
        let rows = random_unit_rows(&mut rng, n, 8);
        let g = build_1nn_graph(&similarity_matrix(&set_from_rows(&rows)).unwrap()).unwrap();
        let nearest = brute_nearest(&rows);
        assert!(g.out_degrees().iter().all(|&d| d == 1));
        for e in g.edges() {
            assert_ne!(e.src, e.dst);
            assert_eq!(e.dst, nearest[e.src]);
        }
        for comp in weakly_connected_components(&g) {
            assert!(comp.len() >= 2);
            let members: BTreeSet<usize> = comp
                .iter()
                .map(|id| g.nodes().iter().position(|x| x == id).unwrap())
                .collect();
            let mutual = members
                .iter()
                .filter(|&&i| nearest[nearest[i]] == i)
                .count();
            assert_eq!(mutual, 2, "a component holds exactly one mutual pair");
        }
    }
}

#[test]
fn pagerank_is_uniform_on_cycles() {
    for n in 2..=10 {
        let nodes = ids(n);
        let edges = (0..n)
            .map(|i| Edge {
                src: i,
                dst: (i + 1) % n,
                weight: 0.5,
            })
            .collect();
        let g = SimilarityGraph::from_edges(nodes, edges, 1).unwrap();
        let pr = pagerank(&g, &PageRankParams::default()).unwrap();
        for s in pr.scores.values() {
            assert!((s - 1.0 / n as f64).abs() <= 1e-9);
        }
    }
}

#[test]
fn pagerank_matches_the_dense_oracle_on_weighted_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let params = PageRankParams {
        tol: 1e-13,
        max_iter: 10_000,
        ..PageRankParams::default()
    };
    for _ in 0..30 {
        let n = rng.random_range(2..25);
        let mut edges = Vec::new();
        let mut raw = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if s != t && rng.random_bool(0.3) {
                    let w = rng.random_range(0.05..1.0);
                    edges.push(Edge {
                        src: s,
                        dst: t,
                        weight: w,
                    });
                    raw.push((s, t, w));
                }
            }
        }
        let g = SimilarityGraph::from_edges(ids(n), edges, 1).unwrap();
        let pr = pagerank(&g, &params).unwrap();
        let oracle = dense_pagerank(n, &raw, params.damping, params.tol, params.max_iter);
        let sum: f64 = pr.scores.values().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        for (s, o) in pr.scores.values().zip(&oracle) {
            assert!((s - o).abs() <= 1e-10, "{s} vs {o}");
        }
    }
}

#[test]
fn mst_weight_matches_kruskal() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..30 {
        let n = rng.random_range(3..40);
        let dim = rng.random_range(1..4);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let ms = rng.random_range(1..=n.min(5));
        let mst = mutual_reachability_mst(&points, ms);
        assert_eq!(mst.len(), n - 1);
        let total: f64 = mst.iter().map(|e| e.weight).sum();
        assert!((total - kruskal_mrd_weight(&points, ms)).abs() <= 1e-9);
    }
}

#[test]
fn hdbscan_is_invariant_under_permutation_translation_and_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let params = HdbscanParams::default();
    for _ in 0..15 {
        let (points, _) = blobs_2d(&mut rng, 12, 0.15);
        let base = with_singleton_noise(&labels_of(&points, &params));

        let mut order: Vec<usize> = (0..points.len()).collect();
        order.shuffle(&mut rng);
        let names = ids(points.len());
        let shuffled = ReducedCoordinates {
            ids: order.iter().map(|&i| names[i].clone()).collect(),
            coords: order.iter().map(|&i| points[i].clone()).collect(),
            dim: 2,
            reducer: "test".into(),
            warnings: vec![],
        };
        let permuted = with_singleton_noise(&hdbscan(&shuffled, &params).unwrap().labels);
        assert_eq!(partition(&permuted), partition(&base));

        let theta: f64 = rng.random_range(0.0..6.0);
        let (dx, dy) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let moved: Vec<Vec<f64>> = points
            .iter()
            .map(|p| {
                vec![
                    p[0] * theta.cos() - p[1] * theta.sin() + dx,
                    p[0] * theta.sin() + p[1] * theta.cos() + dy,
                ]
            })
            .collect();
        let moved_labels = with_singleton_noise(&labels_of(&moved, &params));
        assert_eq!(partition(&moved_labels), partition(&base));
    }
}

#[test]
fn uniform_scatter_yields_no_large_stable_cluster() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = HdbscanParams {
        min_cluster_size: 10,
        min_samples: 3,
    };
    for _ in 0..20 {
        let points: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let labels = labels_of(&points, &params);
        let mut sizes = std::collections::HashMap::new();
        for l in labels.values() {
            if let Label::Cluster(c) = l {
                *sizes.entry(*c).or_insert(0) += 1;
            }
        }
        // a selected cluster may never be smaller than min_cluster_size
        assert!(sizes.values().all(|&s| s >= 10), "{sizes:?}");
        assert!(sizes.len() <= 2);
    }
}

#[test]
fn staged_pca_agrees_with_direct_pca() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..5 {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..64).map(|j| { let z: f64 = StandardNormal.sample(&mut rng); z } * (1.0 + j as f64 / 8.0)).collect())
            .collect();
        let set = set_from_rows(&rows);
        let staged = reduce_pca(&set, &[15, 2], 0).unwrap();
        let direct = reduce_pca(&set, &[2], 0).unwrap();
        for (a, b) in staged.coords.iter().zip(&direct.coords) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
            }
        }
    }
}

#[test]
fn data_on_a_plane_is_reduced_without_distortion() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let dim = 768;
    let basis = random_unit_rows(&mut rng, 2, dim);
    // orthonormalize the second basis vector against the first
    let dot: f64 = basis[0].iter().zip(&basis[1]).map(|(a, b)| a * b).sum();
    let mut e2: Vec<f64> = basis[1]
        .iter()
        .zip(&basis[0])
        .map(|(b, a)| b - dot * a)
        .collect();
    let norm = e2.iter().map(|x| x * x).sum::<f64>().sqrt();
    e2.iter_mut().for_each(|x| *x /= norm);
    let offset: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|_| {
            let (s, t) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            (0..dim)
                .map(|j| offset[j] + s * basis[0][j] + t * e2[j])
                .collect()
        })
        .collect();
    let reduced = reduce_pca(&set_from_rows(&rows), &[2], 0).unwrap();
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            let original = euclid(&rows[i], &rows[j]);
            let kept = euclid(&reduced.coords[i], &reduced.coords[j]);
            assert!((original - kept).abs() <= 1e-6);
        }
    }
}

#[test]
fn gaussian_blobs_keep_their_identity_in_two_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let dim = 768;
    let noise = Normal::new(0.0, 0.05).unwrap();
    let means = random_unit_rows(&mut rng, 3, dim);
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (c, m) in means.iter().enumerate() {
        for _ in 0..20 {
            rows.push(
                m.iter()
                    .map(|x| x + noise.sample(&mut rng))
                    .collect::<Vec<f64>>(),
            );
            truth.push(c);
        }
    }
    let reduced = reduce_pca(&set_from_rows(&rows), &[15, 2], 0).unwrap();
    let centroid = |c: usize| {
        let pts: Vec<&Vec<f64>> = reduced
            .coords
            .iter()
            .zip(&truth)
            .filter(|(_, &t)| t == c)
            .map(|(p, _)| p)
            .collect();
        (0..2)
            .map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64)
            .collect::<Vec<f64>>()
    };
    let centroids: Vec<Vec<f64>> = (0..3).map(centroid).collect();
    let correct = reduced
        .coords
        .iter()
        .zip(&truth)
        .filter(|(p, &t)| {
            (0..3)
                .min_by(|&a, &b| euclid(p, &centroids[a]).total_cmp(&euclid(p, &centroids[b])))
                .unwrap()
                == t
        })
        .count();
    assert!(correct as f64 / rows.len() as f64 >= 0.95);
}

#[test]
fn tied_distances_do_not_make_labels_order_dependent() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let params = HdbscanParams::default();
    for _ in 0..20 {
        // lattice points repeat the same few distances many times
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let blob = rng.random_range(0..3) as f64 * 20.0;
                vec![
                    blob + rng.random_range(0..4) as f64,
                    rng.random_range(0..5) as f64,
                ]
            })
            .collect();
        let base = with_singleton_noise(&labels_of(&points, &params));
        for _ in 0..5 {
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.shuffle(&mut rng);
            let names = ids(points.len());
            let shuffled = ReducedCoordinates {
                ids: order.iter().map(|&i| names[i].clone()).collect(),
                coords: order.iter().map(|&i| points[i].clone()).collect(),
                dim: 2,
                reducer: "test".into(),
                warnings: vec![],
            };
            let permuted = with_singleton_noise(&hdbscan(&shuffled, &params).unwrap().labels);
            assert_eq!(partition(&permuted), partition(&base));
        }
    }
}
