//! Generated corpora with known structure: planted clusters in the reduced
//! space, one low-scoring cluster carrying two planted features, and a training
//! catalog with a known matching subset.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::tensor_io::{
    read_records_from, write_embeddings, write_patch_grids, EmbeddingMatrix, PatchGrid, RecordSet,
};

pub const PLANTED_CATEGORICAL: &str = "grades";
pub const PLANTED_VALUE: &str = "alphanumeric";
pub const PLANTED_NUMERIC: &str = "row_h/image_h";

const GRID_SIDE: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    /// Distance of each cluster centre from the origin along both plane axes.
    pub separation: f64,
    pub noise: f64,
    pub low_score: f64,
    pub high_score: f64,
    /// Half-width of the uniform jitter added to every score.
    pub score_jitter: f64,
    pub catalog_matches: usize,
    pub catalog_decoys: usize,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            n: 200,
            dim: 64,
            seed: 11,
            separation: 6.0,
            noise: 0.5,
            low_score: 0.35,
            high_score: 0.80,
            score_jitter: 0.05,
            catalog_matches: 40,
            catalog_decoys: 80,
        }
    }
}

/// Four clusters at `separation · (±u ± v)` in a random plane; sample `i` has label `i % 4`.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub spec: PlantedSpec,
    pub grids: Vec<PatchGrid>,
    /// Pooled grids; identical to pooling the grids after a VPGR round trip.
    pub embeddings: EmbeddingMatrix,
    pub labels: Vec<usize>,
    pub low_cluster: usize,
    pub metadata_csv: String,
    pub scores_csv: String,
    pub catalog_csv: String,
    /// Catalog ids satisfying both planted features, in catalog order.
    pub planted_ids: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CorpusFiles {
    pub grids: PathBuf,
    pub embeddings: PathBuf,
    pub metadata: PathBuf,
    pub scores: PathBuf,
    pub catalog: PathBuf,
}

pub const CLUSTERS: usize = 4;

impl PlantedCorpus {
    pub fn generate(spec: &PlantedSpec) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (u, v) = random_plane(spec.dim, &mut rng);
        let noise = Normal::new(0.0, spec.noise).expect("noise must be finite and non-negative");
        let jiggle = Normal::new(0.0, 0.1).expect("constant sigma");
        let low_cluster = CLUSTERS - 1;

        let mut grids = Vec::with_capacity(spec.n);
        let mut labels = Vec::with_capacity(spec.n);
        for i in 0..spec.n {
            let label = i % CLUSTERS;
            let su = if label & 1 == 0 { 1.0 } else { -1.0 };
            let sv = if label & 2 == 0 { 1.0 } else { -1.0 };
            let centre: Vec<f64> = (0..spec.dim)
                .map(|j| spec.separation * (su * u[j] + sv * v[j]) + noise.sample(&mut rng))
                .collect();
            grids.push(patch_grid(sample_id(i), &centre, &jiggle, &mut rng)?);
            labels.push(label);
        }
        let embeddings = EmbeddingMatrix::from_patch_grids(grids.iter().cloned().map(Ok))?;

        let mut meta = csv::Writer::from_writer(Vec::new());
        let mut scores = csv::Writer::from_writer(Vec::new());
        meta.write_record([
            "sample_id",
            "grades:intrinsic",
            "row_h/image_h:intrinsic",
            "layout:intrinsic",
            "columns:intrinsic",
            "source:extrinsic",
            "shadows:extrinsic",
        ])?;
        scores.write_record(["sample_id", "f1"])?;
        for (i, &label) in labels.iter().enumerate() {
            let low = label == low_cluster;
            let grades = if low { PLANTED_VALUE } else { "numeric" };
            let ratio = if low {
                rng.random_range(0.015..0.025)
            } else {
                rng.random_range(0.04..0.08)
            };
            let layout = ["A", "B", "C"][rng.random_range(0..3)];
            let columns = rng.random_range(2..=5u32);
            let source = ["camera", "scanner"][rng.random_range(0..2)];
            let shadows = ["yes", "no"][rng.random_range(0..2)];
            meta.write_record([
                &sample_id(i),
                grades,
                &ratio.to_string(),
                layout,
                &columns.to_string(),
                source,
                shadows,
            ])?;
            let base = if low { spec.low_score } else { spec.high_score };
            let jitter = spec.score_jitter * (2.0 * rng.random::<f64>() - 1.0);
            scores.write_record([sample_id(i), (base + jitter).clamp(0.0, 1.0).to_string()])?;
        }

        let (catalog_csv, planted_ids) = catalog(spec, &mut rng)?;
        Ok(Self {
            spec: spec.clone(),
            grids,
            embeddings,
            labels,
            low_cluster,
            metadata_csv: into_string(meta)?,
            scores_csv: into_string(scores)?,
            catalog_csv,
            planted_ids,
        })
    }

    pub fn records(&self) -> Result<RecordSet> {
        read_records_from(
            self.metadata_csv.as_bytes(),
            Some(self.scores_csv.as_bytes()),
        )
    }

    pub fn catalog(&self) -> Result<RecordSet> {
        read_records_from::<_, &[u8]>(self.catalog_csv.as_bytes(), None)
    }

    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<CorpusFiles> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let files = CorpusFiles {
            grids: dir.join("grids.vpgr"),
            embeddings: dir.join("embeddings.vemb"),
            metadata: dir.join("metadata.csv"),
            scores: dir.join("scores.csv"),
            catalog: dir.join("catalog.csv"),
        };
        write_patch_grids(&files.grids, &self.grids)?;
        write_embeddings(&self.embeddings, &files.embeddings)?;
        std::fs::write(&files.metadata, &self.metadata_csv)?;
        std::fs::write(&files.scores, &self.scores_csv)?;
        std::fs::write(&files.catalog, &self.catalog_csv)?;
        Ok(files)
    }
}

pub fn sample_id(i: usize) -> String {
    format!("val-{i:04}")
}

fn random_plane<R: Rng>(dim: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut u: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
    normalize(&mut u);
    let mut v: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
    let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    v.iter_mut().zip(&u).for_each(|(b, a)| *b -= dot * a);
    normalize(&mut v);
    (u, v)
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    x.iter_mut().for_each(|a| *a /= norm);
}

/// A 2×2 grid whose patch perturbations sum to zero, stored at f32 precision.
fn patch_grid<R: Rng>(
    id: String,
    centre: &[f64],
    jiggle: &Normal<f64>,
    rng: &mut R,
) -> Result<PatchGrid> {
    let patches = GRID_SIDE * GRID_SIDE;
    let dim = centre.len();
    let mut values = vec![0.0; patches * dim];
    for j in 0..dim {
        let mut sum = 0.0;
        for p in 0..patches - 1 {
            let e = jiggle.sample(rng);
            sum += e;
            values[p * dim + j] = centre[j] + e;
        }
        values[(patches - 1) * dim + j] = centre[j] - sum;
    }
    for x in &mut values {
        *x = *x as f32 as f64;
    }
    PatchGrid::new(id, GRID_SIDE, GRID_SIDE, dim, values)
}

fn catalog<R: Rng>(spec: &PlantedSpec, rng: &mut R) -> Result<(String, Vec<String>)> {
    // (grades, ratio) pairs: planted rows first, then decoys that break one predicate each.
    let mut rows: Vec<(bool, &str, Option<f64>)> = Vec::new();
    for _ in 0..spec.catalog_matches {
        rows.push((true, PLANTED_VALUE, Some(rng.random_range(0.019..0.021))));
    }
    for d in 0..spec.catalog_decoys {
        rows.push(match d % 6 {
            0 => (false, PLANTED_VALUE, Some(rng.random_range(0.04..0.08))),
            1 => (false, "numeric", Some(rng.random_range(0.019..0.021))),
            2 => (false, "numeric", Some(rng.random_range(0.04..0.08))),
            3 => (false, PLANTED_VALUE, None),
            4 => (false, PLANTED_VALUE, Some(0.012)),
            _ => (false, PLANTED_VALUE, Some(0.028)),
        });
    }
    rows.shuffle(rng);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sample_id",
        "grades",
        "row_h/image_h",
        "layout",
        "columns",
        "source",
        "shadows",
    ])?;
    let mut planted = Vec::new();
    for (i, (is_planted, grades, ratio)) in rows.into_iter().enumerate() {
        let id = format!("train-{i:04}");
        let layout = ["A", "A-double", "B", "C"][rng.random_range(0..4)];
        let columns = rng.random_range(2..=5u32).to_string();
        let source = ["camera", "scanner"][rng.random_range(0..2)];
        let shadows = ["yes", "no"][rng.random_range(0..2)];
        let ratio = ratio.map(|r| r.to_string()).unwrap_or_default();
        w.write_record([
            id.as_str(),
            grades,
            &ratio,
            layout,
            &columns,
            source,
            shadows,
        ])?;
        if is_planted {
            planted.push(id);
        }
    }
    Ok((into_string(w)?, planted))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8 from UTF-8 input"))
}
