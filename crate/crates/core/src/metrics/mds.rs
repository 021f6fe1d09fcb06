use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

use super::{DistanceMatrix, MetricsError};

/// Classical (Torgerson) MDS into two dimensions.
///
/// `B = -½ J D² J`; coordinates are the top two eigenvectors scaled by
/// `√max(λ, 0)`. Each column's largest-magnitude entry is made positive so
/// the output does not depend on the eigensolver's sign choice.
pub fn mds_2d(dist: &DistanceMatrix) -> Result<Array2<f64>, MetricsError> {
    let n = dist.len();
    let mut out = Array2::zeros((n, 2));
    if n == 0 {
        return Ok(out);
    }
    for ((i, j), &v) in dist.values.indexed_iter() {
        if !v.is_finite() {
            return Err(MetricsError::NonFiniteDistance { row: i, col: j });
        }
    }

    let sq = DMatrix::from_fn(n, n, |i, j| dist.values[[i, j]].powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let col_means: Vec<f64> = (0..n).map(|j| sq.column(j).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - col_means[j] + grand)
    });
    // symmetrize against rounding before the symmetric solver
    let b = (&b + b.transpose()) * 0.5;

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eig.eigenvalues[c]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&c))
    });

    for (dim, &k) in order.iter().take(2).enumerate() {
        let scale = eig.eigenvalues[k].max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        let pivot = (0..n).fold(
            0,
            |best, i| {
                if v[i].abs() > v[best].abs() {
                    i
                } else {
                    best
                }
            },
        );
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            out[[i, dim]] = sign * v[i] * scale;
        }
    }
    Ok(out)
}
