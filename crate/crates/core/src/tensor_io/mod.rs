//! Embedding containers, patch-grid pooling and sample metadata.
//!
//! Two little-endian binary containers are defined here:
//!
//! ```text
//! VEMB  "VEMB" | version u32 = 1 | n u32 | L u32
//!       | id count u32 | n × (len u16, UTF-8 bytes)
//!       | n × L float32, row-major
//!
//! VPGR  "VPGR" | version u32 = 1 | image count u32
//!       | per image: len u16, UTF-8 id, rows u16, cols u16, L u32,
//!         rows × cols × L float32 (row, col, channel order)
//! ```
//!
//! Readers are strict: trailing bytes, truncation, zero-sized grids and
//! inconsistent counts are all [`FormatError`](crate::FormatError)s.

mod records;
mod vemb;
mod vpgr;

pub use records::{
    read_records, read_records_from, read_scores_from, FeatureColumn, FeatureKind, FeatureTag,
    FeatureValue, RecordSet, SampleRecord,
};
pub use vemb::{decode_embeddings, encode_embeddings, read_embeddings, write_embeddings};
pub use vpgr::{encode_patch_grids, read_patch_grids, write_patch_grids, PatchGridReader};

use std::collections::HashSet;

use crate::error::{Error, Result};

pub(crate) const VEMB_MAGIC: &[u8; 4] = b"VEMB";
pub(crate) const VPGR_MAGIC: &[u8; 4] = b"VPGR";
pub(crate) const FORMAT_VERSION: u32 = 1;

/// Hidden states of one image laid out on an `rows × cols` patch grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    sample_id: String,
    rows: usize,
    cols: usize,
    dim: usize,
    values: Vec<f64>,
}

impl PatchGrid {
    /// Builds a grid from `rows × cols × dim` values in (row, col, channel) order.
    pub fn new(
        sample_id: impl Into<String>,
        rows: usize,
        cols: usize,
        dim: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let sample_id = sample_id.into();
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::DegenerateInput(format!(
                "patch grid `{sample_id}` has shape {rows}x{cols}x{dim}"
            )));
        }
        let expected = rows * cols * dim;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "patch grid `{sample_id}` value {pos}"
            )));
        }
        Ok(Self {
            sample_id,
            rows,
            cols,
            dim,
            values,
        })
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `dim`-long hidden state of one patch.
    pub fn patch(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.cols + col) * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn patches(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }
}

/// Average-pools a patch grid into a single `dim`-long embedding.
///
/// Accumulation is in double precision regardless of how the grid was stored.
pub fn pool_patch_grid(grid: &PatchGrid) -> Result<Vec<f64>> {
    let mut acc = vec![0.0f64; grid.dim];
    for (p, patch) in grid.patches().enumerate() {
        for (d, (a, &v)) in acc.iter_mut().zip(patch).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "patch grid `{}` patch {p} channel {d}",
                    grid.sample_id
                )));
            }
            *a += v;
        }
    }
    let count = (grid.rows * grid.cols) as f64;
    for a in &mut acc {
        *a /= count;
    }
    if let Some(d) = acc.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "pooled `{}` channel {d}",
            grid.sample_id
        )));
    }
    Ok(acc)
}

/// `n` embeddings of dimension `L` keyed by unique sample ids.
///
/// Values are held at storage precision (float32); analysis widens to f64.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(ids: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DegenerateInput("embedding dimension is zero".into()));
        }
        let expected = ids.len() * dim;
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "embedding `{}` channel {}",
                ids[pos / dim],
                pos % dim
            )));
        }
        Ok(Self { ids, dim, data })
    }

    /// Builds a matrix from double-precision rows, narrowing to float32.
    pub fn from_rows<I, R>(ids: Vec<String>, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut dim = None;
        let mut data = Vec::new();
        for row in rows {
            let row = row.as_ref();
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: row.len(),
                    })
                }
                _ => {}
            }
            data.extend(row.iter().map(|&v| v as f32));
        }
        let dim = dim.ok_or_else(|| Error::DegenerateInput("no rows".into()))?;
        Self::new(ids, dim, data)
    }

    /// Pools every grid of a stream into one matrix, preserving stream order.
    pub fn from_patch_grids<I>(grids: I) -> Result<Self>
    where
        I: IntoIterator<Item = Result<PatchGrid>>,
    {
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for grid in grids {
            let grid = grid?;
            rows.push(pool_patch_grid(&grid)?);
            ids.push(grid.sample_id);
        }
        Self::from_rows(ids, rows)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    /// Row-major copy widened to f64.
    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Adds the offending path to an I/O error.
pub fn with_path(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    }
}
