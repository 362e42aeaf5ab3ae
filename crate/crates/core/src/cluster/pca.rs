use nalgebra::{DMatrix, SymmetricEigen};

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};

use super::ReducedCoordinates;

pub const DEFAULT_STAGES: [usize; 2] = [15, 2];

/// Eigenvalues at or below this fraction of the largest are treated as zero.
const RANK_TOLERANCE: f64 = 1e-12;

/// Staged PCA: each stage mean-centers its input and projects onto the top
/// principal directions.
///
/// Components come in descending eigenvalue order; each direction is signed
/// so that its largest-magnitude loading is positive. When the data has
/// fewer informative directions than requested, trailing components are zero.
/// `seed` is recorded for provenance only: the reduction is deterministic.
pub fn reduce_pca(set: &EmbeddingSet, stages: &[usize], seed: u64) -> Result<ReducedCoordinates> {
    let n = set.len();
    let dim = set.dim();
    let Some(&last) = stages.last() else {
        return Err(Error::Argument(
            "at least one reduction stage is required".into(),
        ));
    };
    if stages.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Argument(format!(
            "reduction stages must be strictly decreasing, got {stages:?}"
        )));
    }
    if last < 2 {
        return Err(Error::Argument(format!(
            "final reduction stage must be >= 2, got {last}"
        )));
    }
    if stages[0] >= dim {
        return Err(Error::Argument(format!(
            "first stage {} must be below the embedding dim {dim}",
            stages[0]
        )));
    }
    if n <= last {
        return Err(Error::Argument(format!(
            "need more than {last} issues to reduce to {last} dimensions, got {n}"
        )));
    }

    let rows: Vec<&[f64]> = set.iter().map(|(_, v)| v.values()).collect();
    let mut data = DMatrix::from_fn(n, dim, |i, j| rows[i][j]);
    let mut warnings = Vec::new();
    for &k in stages {
        let (reduced, informative) = pca_stage(&data, k);
        if informative < k {
            let msg = format!(
                "stage to {k} dims: data has only {informative} informative directions, \
                 trailing components zero-filled"
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        data = reduced;
    }

    let ids: Vec<String> = set.ids().map(str::to_string).collect();
    let coords = (0..n)
        .map(|i| data.row(i).iter().copied().collect())
        .collect();
    let stage_list = stages
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",");
    Ok(ReducedCoordinates {
        ids,
        coords,
        dim: last,
        reducer: format!("pca[{stage_list}] seed={seed}"),
        warnings,
    })
}

/// Projects `data` (rows are samples) onto its top `k` principal directions.
/// Returns the scores and the number of directions with nonzero variance.
pub(crate) fn pca_stage(data: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, usize) {
    let (n, p) = data.shape();
    let mut centered = data.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }

    // Work with whichever of the n×n Gram matrix or p×p scatter matrix is smaller.
    let use_gram = n <= p;
    let sym = if use_gram {
        &centered * centered.transpose()
    } else {
        centered.transpose() * &centered
    };
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let top = eig.eigenvalues[order[0]].max(0.0);

    let mut scores = DMatrix::zeros(n, k);
    let mut informative = 0;
    for (c, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx];
        if top == 0.0 || lambda <= RANK_TOLERANCE * top {
            break;
        }
        informative += 1;
        let vec = eig.eigenvectors.column(idx);
        let (mut loading, mut score) = if use_gram {
            let s = lambda.sqrt();
            (centered.transpose() * vec / s, vec * s)
        } else {
            let v = vec.into_owned();
            let sc = &centered * &v;
            (v, sc)
        };
        if dominant_entry(loading.as_slice()) < 0.0 {
            loading.neg_mut();
            score.neg_mut();
        }
        scores.set_column(c, &score);
    }
    (scores, informative)
}

/// Entry of largest magnitude (first one on ties).
fn dominant_entry(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    best
}
