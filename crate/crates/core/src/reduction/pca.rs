use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_io::EmbeddingMatrix;

/// A PCA model fitted on one embedding matrix, plus that matrix's projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSpace {
    pub mean: Vec<f64>,
    /// `d` unit-norm principal axes of length `L`, strongest first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    /// Projected coordinates of the fitted samples, `n × d`.
    pub coords: Vec<Vec<f64>>,
    pub source_ids: Vec<String>,
}

impl ReducedSpace {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// Projects one input-space vector.
    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|axis| {
                axis.iter()
                    .zip(row.iter().zip(&self.mean))
                    .map(|(a, (x, m))| a * (x - m))
                    .sum()
            })
            .collect()
    }

    /// Maps reduced coordinates back to the input space.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, axis) in coords.iter().zip(&self.components) {
            for (o, a) in out.iter_mut().zip(axis) {
                *o += c * a;
            }
        }
        out
    }
}

/// Fits a `d`-component PCA through the thin SVD of the mean-centred matrix.
///
/// Each axis is oriented so that its largest-magnitude entry is positive
/// (ties go to the lowest index), which makes the fit reproducible.
pub fn pca_fit(matrix: &EmbeddingMatrix, d: usize) -> Result<ReducedSpace> {
    fit(matrix.ids().to_vec(), matrix.to_f64(), matrix.dim(), d)
}

/// [`pca_fit`] on double-precision rows, for data that is not stored as f32.
pub fn pca_fit_rows(ids: Vec<String>, rows: &[Vec<f64>], d: usize) -> Result<ReducedSpace> {
    if ids.len() != rows.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            found: ids.len(),
        });
    }
    let dim = rows.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(Error::DegenerateInput("rows have no columns".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("PCA input".into()));
    }
    fit(ids, rows.concat(), dim, d)
}

fn fit(ids: Vec<String>, data: Vec<f64>, dim: usize, d: usize) -> Result<ReducedSpace> {
    let n = ids.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "PCA needs at least 2 samples, got {n}"
        )));
    }
    let max = (n - 1).min(dim);
    if d == 0 || d > max {
        return Err(Error::DimensionTooLarge { requested: d, max });
    }

    let mut mean = vec![0.0; dim];
    for row in data.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<f64> = data
        .chunks_exact(dim)
        .flat_map(|row| row.iter().zip(&mean).map(|(v, m)| v - m))
        .collect();
    let total_ss: f64 = centered.iter().map(|v| v * v).sum();

    let svd = DMatrix::from_row_slice(n, dim, &centered).svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let singular = &svd.singular_values;

    let s_max = singular.iter().cloned().fold(0.0, f64::max);
    let tol = s_max * (n.max(dim) as f64) * f64::EPSILON;
    if total_ss == 0.0 || s_max <= tol || singular.iter().all(|&s| s <= tol) {
        return Err(Error::DegenerateInput("all rows are identical".into()));
    }

    let mut order: Vec<usize> = (0..singular.len()).collect();
    order.sort_by(|&a, &b| singular[b].total_cmp(&singular[a]).then(a.cmp(&b)));

    let denom = (n - 1) as f64;
    let mut components = Vec::with_capacity(d);
    let mut explained_variance = Vec::with_capacity(d);
    let mut explained_ratio = Vec::with_capacity(d);
    for &idx in order.iter().take(d) {
        let mut axis: Vec<f64> = v_t.row(idx).iter().copied().collect();
        orient(&mut axis);
        let s = singular[idx];
        components.push(axis);
        explained_variance.push(s * s / denom);
        explained_ratio.push((s * s / total_ss).min(1.0));
    }

    let mut space = ReducedSpace {
        mean,
        components,
        explained_variance,
        explained_ratio,
        coords: Vec::new(),
        source_ids: ids,
    };
    space.coords = data
        .chunks_exact(dim)
        .map(|row| space.project(row))
        .collect();
    Ok(space)
}

/// Projects another matrix (e.g. training samples) into a fitted space, preserving row order.
pub fn pca_transform(space: &ReducedSpace, matrix: &EmbeddingMatrix) -> Result<Vec<Vec<f64>>> {
    if matrix.dim() != space.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.input_dim(),
            found: matrix.dim(),
        });
    }
    Ok(matrix
        .rows()
        .map(|row| {
            let row: Vec<f64> = row.iter().map(|&v| f64::from(v)).collect();
            space.project(&row)
        })
        .collect())
}

fn orient(axis: &mut [f64]) {
    let mut best = 0;
    for (i, v) in axis.iter().enumerate() {
        if v.abs() > axis[best].abs() {
            best = i;
        }
    }
    if axis[best] < 0.0 {
        for v in axis.iter_mut() {
            *v = -*v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> EmbeddingMatrix {
        let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
        EmbeddingMatrix::from_rows(ids, rows.iter().copied()).unwrap()
    }

    #[test]
    fn collinear_points_have_one_component() {
        let m = matrix(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], &[-3.0, -3.0]]);
        let space = pca_fit(&m, 2).unwrap();
        assert!((space.explained_ratio[0] - 1.0).abs() < 1e-9);
        assert!(space.explained_ratio[1].abs() < 1e-9);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((space.components[0][0] - h).abs() < 1e-12);
        assert!((space.components[0][1] - h).abs() < 1e-12);
    }

    #[test]
    fn identical_rows_are_degenerate() {
        let m = matrix(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        assert!(matches!(pca_fit(&m, 1), Err(Error::DegenerateInput(_))));
        let single = matrix(&[&[1.0, 2.0]]);
        assert!(matches!(
            pca_fit(&single, 1),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn too_many_components() {
        let m = matrix(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 2.0], &[3.0, 1.0, 0.0]]);
        assert!(matches!(
            pca_fit(&m, 3),
            Err(Error::DimensionTooLarge { max: 2, .. })
        ));
        assert!(matches!(
            pca_fit(&m, 0),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn transform_of_mean_is_origin() {
        let m = matrix(&[
            &[0.0, 1.0, 2.0],
            &[1.0, 0.0, 2.0],
            &[3.0, 1.0, 0.0],
            &[1.0, 1.0, 1.0],
        ]);
        let space = pca_fit(&m, 2).unwrap();
        let at_mean = space.project(&space.mean);
        assert!(at_mean.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn transform_checks_dimension() {
        let m = matrix(&[&[0.0, 1.0], &[1.0, 0.0], &[2.0, 2.0]]);
        let space = pca_fit(&m, 1).unwrap();
        let other = matrix(&[&[0.0, 1.0, 2.0]]);
        assert!(matches!(
            pca_transform(&space, &other),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn orientation_makes_largest_entry_positive() {
        let mut v = vec![0.1, -0.9, 0.3];
        orient(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
        let mut tie = vec![-0.5, 0.5];
        orient(&mut tie);
        assert_eq!(tie, vec![0.5, -0.5]);
    }
}
