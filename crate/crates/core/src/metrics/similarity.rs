use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::encoder::Representation;
use crate::table::{Cell, Table};

/// Mean over time steps.
pub fn time_average(rep: &Representation) -> Result<Array1<f64>, MetricsError> {
    if rep.steps() == 0 {
        return Err(MetricsError::EmptyRepresentation);
    }
    let mut sum = Array1::zeros(rep.features());
    for row in rep.matrix.rows() {
        sum += &row;
    }
    Ok(sum / rep.steps() as f64)
}

/// `u·v / (‖u‖‖v‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(u: ArrayView1<f64>, v: ArrayView1<f64>) -> Result<f64, MetricsError> {
    if u.len() != v.len() {
        return Err(MetricsError::ShapeMismatch(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let nu = u.dot(&u).sqrt();
    let nv = v.dot(&v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(MetricsError::ZeroVector);
    }
    if u == v {
        return Ok(1.0);
    }
    Ok((u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0))
}

pub fn cosine_distance(u: ArrayView1<f64>, v: ArrayView1<f64>) -> Result<f64, MetricsError> {
    cosine_similarity(u, v).map(|s| 1.0 - s)
}

/// `M[a, b] = mean_i S_c(r̄_a, r_{b,i})`: rows are time-averaged
/// references, columns are stepwise representations.
pub fn consistency_matrix(reps: &[Representation]) -> Result<Array2<f64>, MetricsError> {
    let Some(first) = reps.first() else {
        return Ok(Array2::zeros((0, 0)));
    };
    let shape = first.matrix.dim();
    if let Some(bad) = reps.iter().find(|r| r.matrix.dim() != shape) {
        return Err(MetricsError::ShapeMismatch(format!(
            "representation {:?} differs from {:?}",
            bad.matrix.dim(),
            shape
        )));
    }
    let means = reps
        .iter()
        .map(time_average)
        .collect::<Result<Vec<_>, _>>()?;
    let n = reps.len();
    let mut out = Array2::zeros((n, n));
    for (a, mean) in means.iter().enumerate() {
        for (b, rep) in reps.iter().enumerate() {
            let mut acc = 0.0;
            for step in rep.matrix.rows() {
                acc += cosine_similarity(mean.view(), step)?;
            }
            out[[a, b]] = acc / rep.steps() as f64;
        }
    }
    Ok(out)
}

/// Pairwise cosine distances over a labeled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    #[serde(with = "matrix_rows")]
    pub values: Array2<f64>,
}

impl DistanceMatrix {
    /// Check symmetry (1e-9), zero diagonal, and the `[0, 2]` range.
    pub fn new(labels: Vec<String>, values: Array2<f64>) -> Result<Self, MetricsError> {
        let n = labels.len();
        if values.dim() != (n, n) {
            return Err(MetricsError::InvalidDistanceMatrix(format!(
                "{} labels for a {:?} matrix",
                n,
                values.dim()
            )));
        }
        for ((i, j), &v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(MetricsError::NonFiniteDistance { row: i, col: j });
            }
            if !(0.0..=2.0).contains(&v) {
                return Err(MetricsError::InvalidDistanceMatrix(format!(
                    "entry ({i}, {j}) = {v} outside [0, 2]"
                )));
            }
            if (v - values[[j, i]]).abs() > 1e-9 {
                return Err(MetricsError::InvalidDistanceMatrix(format!(
                    "asymmetric at ({i}, {j})"
                )));
            }
            if i == j && v != 0.0 {
                return Err(MetricsError::InvalidDistanceMatrix(format!(
                    "non-zero diagonal at {i}"
                )));
            }
        }
        Ok(Self { labels, values })
    }

    /// Cosine distances between all pairs of `vectors`.
    pub fn cosine(labels: Vec<String>, vectors: &[Array1<f64>]) -> Result<Self, MetricsError> {
        let n = vectors.len();
        if labels.len() != n {
            return Err(MetricsError::InvalidDistanceMatrix(format!(
                "{} labels for {} vectors",
                labels.len(),
                n
            )));
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| match i.cmp(&j) {
                        std::cmp::Ordering::Equal => Ok(0.0),
                        std::cmp::Ordering::Less => {
                            cosine_distance(vectors[i].view(), vectors[j].view())
                        }
                        std::cmp::Ordering::Greater => {
                            cosine_distance(vectors[j].view(), vectors[i].view())
                        }
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        let values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
        Ok(Self { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// CSV layout: header `label,<l_0>,…,<l_n>`, one row per label.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["label".to_string()];
        header.extend(self.labels.iter().cloned());
        let rows = self
            .labels
            .iter()
            .zip(self.values.rows())
            .map(|(label, row)| {
                std::iter::once(Cell::from(label.as_str()))
                    .chain(row.iter().map(|&v| Cell::Num(v)))
                    .collect()
            })
            .collect();
        Table::new(header, rows)
    }
}

pub(crate) mod matrix_rows {
    use ndarray::Array2;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Array2::from_shape_vec((n, m), rows.into_iter().flatten().collect())
            .map_err(D::Error::custom)
    }
}
