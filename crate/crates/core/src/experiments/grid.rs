//! Grid-structure statistic: mean distance between non-adjacent grid points
//! divided by mean distance between adjacent ones.
//!
//! Points are indexed row-major over `shape`; two points are adjacent when
//! their grid coordinates differ by one step along exactly one axis.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{cosine_distance, DistanceMatrix, MetricsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridStatistic {
    /// `None` when either pair class is empty or adjacent distances are all zero.
    pub ratio: Option<f64>,
    pub mean_adjacent: Option<f64>,
    pub mean_nonadjacent: Option<f64>,
    pub adjacent_pairs: usize,
    pub nonadjacent_pairs: usize,
    /// Whether non-adjacent pairs were sampled rather than enumerated.
    pub sampled: bool,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Grid coordinates of a flat index.
pub fn unravel(shape: &[usize], mut index: usize) -> Vec<usize> {
    let st = strides(shape);
    st.iter()
        .map(|&s| {
            let c = index / s;
            index %= s;
            c
        })
        .collect()
}

/// All `(i, j)` with `i < j` adjacent on the grid.
pub fn adjacent_pairs(shape: &[usize]) -> Vec<(usize, usize)> {
    let n: usize = shape.iter().product();
    let st = strides(shape);
    let mut out = Vec::new();
    for i in 0..n {
        let coords = unravel(shape, i);
        for (axis, (&c, &dim)) in coords.iter().zip(shape).enumerate() {
            if c + 1 < dim {
                out.push((i, i + st[axis]));
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn is_adjacent(shape: &[usize], a: usize, b: usize) -> bool {
    let ca = unravel(shape, a);
    let cb = unravel(shape, b);
    ca.iter()
        .zip(&cb)
        .map(|(x, y)| x.abs_diff(*y))
        .sum::<usize>()
        == 1
}

fn finish(
    adj_sum: f64,
    adj_count: usize,
    non_sum: f64,
    non_count: usize,
    sampled: bool,
) -> GridStatistic {
    let mean_adjacent = (adj_count > 0).then(|| adj_sum / adj_count as f64);
    let mean_nonadjacent = (non_count > 0).then(|| non_sum / non_count as f64);
    let ratio = match (mean_adjacent, mean_nonadjacent) {
        (Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    GridStatistic {
        ratio,
        mean_adjacent,
        mean_nonadjacent,
        adjacent_pairs: adj_count,
        nonadjacent_pairs: non_count,
        sampled,
    }
}

/// Exact statistic from a full distance matrix.
pub fn grid_statistic(shape: &[usize], dist: &DistanceMatrix) -> GridStatistic {
    let n = dist.len();
    assert_eq!(
        shape.iter().product::<usize>(),
        n,
        "grid shape does not match matrix"
    );
    let adjacent = adjacent_pairs(shape);
    let adj_sum: f64 = adjacent.iter().map(|&(i, j)| dist.values[[i, j]]).sum();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += dist.values[[i, j]];
        }
    }
    let all_pairs = n * n.saturating_sub(1) / 2;
    finish(
        adj_sum,
        adjacent.len(),
        total - adj_sum,
        all_pairs - adjacent.len(),
        false,
    )
}

/// Statistic over time-averaged vectors without materializing the matrix.
/// Adjacent pairs are always enumerated; non-adjacent pairs are enumerated
/// when there are at most `max_pairs`, otherwise `max_pairs` of them are
/// drawn uniformly with a seeded generator.
pub fn grid_statistic_from_vectors(
    shape: &[usize],
    vectors: &[Array1<f64>],
    max_pairs: usize,
    seed: u64,
) -> Result<GridStatistic, MetricsError> {
    let n = vectors.len();
    assert_eq!(
        shape.iter().product::<usize>(),
        n,
        "grid shape does not match vectors"
    );
    let adjacent = adjacent_pairs(shape);
    let mut adj_sum = 0.0;
    for &(i, j) in &adjacent {
        adj_sum += cosine_distance(vectors[i].view(), vectors[j].view())?;
    }
    let non_total = n * n.saturating_sub(1) / 2 - adjacent.len();
    if non_total <= max_pairs {
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                if adjacent.binary_search(&(i, j)).is_err() {
                    sum += cosine_distance(vectors[i].view(), vectors[j].view())?;
                }
            }
        }
        return Ok(finish(adj_sum, adjacent.len(), sum, non_total, false));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut drawn = 0;
    while drawn < max_pairs {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || is_adjacent(shape, a, b) {
            continue;
        }
        sum += cosine_distance(vectors[a].view(), vectors[b].view())?;
        drawn += 1;
    }
    Ok(finish(adj_sum, adjacent.len(), sum, drawn, true))
}
