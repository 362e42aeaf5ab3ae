//! Cosine similarity, dense similarity matrices and nearest-neighbor lists.

use std::cmp::Ordering;
use std::io::Write;

use indexmap::IndexMap;

use crate::embeddings::{EmbeddingSet, EmbeddingVector};
use crate::error::{Error, Result};

/// Cosine of the angle between two vectors, clamped to `[-1, 1]`.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    cosine_slices(a.values(), b.values())
}

pub(crate) fn cosine_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "cosine of vectors with different dims ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Argument("cosine of a zero-norm vector".into()));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense symmetric matrix of pairwise cosine similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

/// One entry of a neighbor list.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: String,
    pub similarity: f64,
}

impl SimilarityMatrix {
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Indices of the `k` most similar other rows of `i`, best first; equal
    /// similarities resolve to the lexicographically smaller id.
    pub(crate) fn nearest(&self, i: usize, k: usize) -> Vec<usize> {
        let row = self.row(i);
        let mut others: Vec<usize> = (0..self.ids.len()).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| {
            row[b]
                .partial_cmp(&row[a])
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.ids[a].cmp(&self.ids[b]))
        });
        others.truncate(k);
        others
    }

    /// Writes the matrix as CSV with ids as header row and first column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Format(format!("similarity CSV: {e}"));
        let mut header = vec![String::new()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Format(format!("similarity CSV: {e}")))
    }
}

/// Pairwise cosine similarity of every vector in the set, in set order.
pub fn similarity_matrix(set: &EmbeddingSet) -> Result<SimilarityMatrix> {
    if set.len() < 2 {
        return Err(Error::Argument(format!(
            "similarity matrix needs at least 2 vectors, got {}",
            set.len()
        )));
    }
    let ids: Vec<String> = set.ids().map(str::to_string).collect();
    let vecs: Vec<&[f64]> = set.iter().map(|(_, v)| v.values()).collect();
    let n = ids.len();
    let norms: Vec<f64> = vecs.iter().map(|v| norm(v)).collect();
    if let Some(i) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::Argument(format!(
            "zero-norm vector for {:?}",
            ids[i]
        )));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let c = (dot(vecs[i], vecs[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    Ok(SimilarityMatrix { ids, values })
}

/// The `k` most similar other ids for every id, in descending similarity.
pub fn knn(matrix: &SimilarityMatrix, k: usize) -> Result<IndexMap<String, Vec<Neighbor>>> {
    let n = matrix.len();
    if k == 0 || k >= n {
        return Err(Error::Argument(format!(
            "k must lie in [1, {}], got {k}",
            n.saturating_sub(1)
        )));
    }
    Ok((0..n)
        .map(|i| {
            let list = matrix
                .nearest(i, k)
                .into_iter()
                .map(|j| Neighbor {
                    id: matrix.ids[j].clone(),
                    similarity: matrix.get(i, j),
                })
                .collect();
            (matrix.ids[i].clone(), list)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec()).unwrap()
    }

    fn set(pairs: &[(&str, &[f64])]) -> EmbeddingSet {
        EmbeddingSet::new(
            "t",
            pairs.iter().map(|(id, x)| (id.to_string(), v(x))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&v(&[3.0, 4.0]), &v(&[3.0, 4.0])).unwrap(), 1.0);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        let c = cosine(&v(&[1.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((c - 0.7071067811865475).abs() < 1e-15);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine(&v(&[1.0, 0.0]), &v(&[1.0, 0.0, 0.0])),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn knn_three_point_example() {
        let m = similarity_matrix(&set(&[
            ("A", &[1.0, 0.0]),
            ("B", &[0.9, 0.1]),
            ("C", &[0.0, 1.0]),
        ]))
        .unwrap();
        let nn = knn(&m, 1).unwrap();
        assert_eq!(nn["A"][0].id, "B");
        assert_eq!(nn["B"][0].id, "A");
        assert_eq!(nn["C"][0].id, "B");
    }

    #[test]
    fn knn_full_lists_are_permutations() {
        let m = similarity_matrix(&set(&[
            ("a", &[1.0, 0.2]),
            ("b", &[0.3, 1.0]),
            ("c", &[-1.0, 0.5]),
            ("d", &[0.1, -1.0]),
        ]))
        .unwrap();
        let nn = knn(&m, 3).unwrap();
        for (id, list) in &nn {
            let mut ids: Vec<&str> = list.iter().map(|n| n.id.as_str()).collect();
            ids.sort();
            let mut expected: Vec<&str> = ["a", "b", "c", "d"]
                .into_iter()
                .filter(|x| x != id)
                .collect();
            expected.sort();
            assert_eq!(ids, expected);
            assert!(list.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        }
        assert!(knn(&m, 4).is_err());
        assert!(knn(&m, 0).is_err());
    }

    #[test]
    fn identical_vectors_pick_each_other_and_ties_go_to_smallest_id() {
        let m = similarity_matrix(&set(&[
            ("x", &[1.0, 0.0]),
            ("y", &[0.0, 1.0]),
            ("z", &[1.0, 0.0]),
        ]))
        .unwrap();
        let nn = knn(&m, 1).unwrap();
        assert_eq!(nn["x"][0].id, "z");
        assert_eq!(nn["z"][0].id, "x");
        // y is orthogonal to both: tie resolves to "x"
        assert_eq!(nn["y"][0].id, "x");
    }

    #[test]
    fn matrix_requires_two_vectors() {
        assert!(similarity_matrix(&set(&[("a", &[1.0])])).is_err());
    }

    #[test]
    fn csv_dump_has_id_header() {
        let m = similarity_matrix(&set(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])])).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, ",a,b\na,1,0\nb,0,1\n");
    }
}
