use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use verse_core::explain::{compose_booster, detect_low_clusters, sweep_report, Run, Session};
use verse_core::pipeline::{analyze, cluster, diagnose, project, reduce, Reduction};
use verse_core::report::SessionReport;
use verse_core::tensor_io::{
    read_embeddings, read_patch_grids, read_records, with_path, write_embeddings, EmbeddingMatrix,
    RecordSet,
};
use verse_core::{Error, RunConfig};

/// Environment variable holding the default master seed.
pub const SEED_ENV: &str = "VERSE_SEED";

#[derive(Debug, Parser)]
#[command(name = "verse", version, about = "Reduced embedding space analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average-pool a patch-grid file into an embedding file.
    Pool {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the reduced space; optionally project a second embedding file into it.
    Reduce {
        #[arg(long)]
        emb: PathBuf,
        /// Embeddings to project into the fitted space (e.g. training samples).
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Reduce, cluster and write the diagnostics report.
    Diagnose {
        #[arg(long)]
        emb: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Cluster a reduced space written by `reduce`.
    Cluster {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Build a session from embeddings, metadata and scores.
    Explain {
        #[arg(long)]
        emb: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Session JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cluster report JSON (diagnostics, flags, attributions).
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compose a booster spec for one cluster and match it against a catalog.
    Booster {
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        cluster: usize,
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare runs over the validation set and the flagged clusters.
    Sweep {
        #[arg(long)]
        session: PathBuf,
        /// Comma-separated `sample_id,f1` files; each run is labelled by its file stem.
        #[arg(long, value_delimiter = ',', required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        baseline: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        min_size: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

/// Run configuration flags; unset flags fall back to `--config`, then defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat JSON document mirroring the run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub trust_k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub min_size: Option<usize>,
    #[arg(long)]
    pub top_n: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, Error> {
        let mut config = match &self.config {
            Some(path) => config_over_base(serde_json::from_reader(open(path)?)?)?,
            None => base_config()?,
        };
        let ConfigArgs {
            config: _,
            seed,
            d,
            k_min,
            k_max,
            trust_k,
            threshold,
            delta,
            min_size,
            top_n,
        } = self;
        overwrite(&mut config.seed, seed);
        overwrite(&mut config.d, d);
        overwrite(&mut config.k_min, k_min);
        overwrite(&mut config.k_max, k_max);
        overwrite(&mut config.trust_k, trust_k);
        overwrite(&mut config.threshold, threshold);
        overwrite(&mut config.delta, delta);
        overwrite(&mut config.min_size, min_size);
        overwrite(&mut config.top_n, top_n);
        config.validate()?;
        Ok(config)
    }
}

fn overwrite<T: Copy>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = *v;
    }
}

/// Built-in defaults with the seed taken from `VERSE_SEED` when set.
pub fn base_config() -> Result<RunConfig, Error> {
    let mut config = RunConfig::default();
    if let Ok(raw) = std::env::var(SEED_ENV) {
        config.seed = raw
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
    }
    Ok(config)
}

/// Applies a flat JSON config document over [`base_config`]; absent keys keep their base value.
pub fn config_over_base(
    doc: serde_json::Map<String, serde_json::Value>,
) -> Result<RunConfig, Error> {
    let mut merged = serde_json::to_value(base_config()?)?;
    if let serde_json::Value::Object(fields) = &mut merged {
        fields.extend(doc);
    }
    Ok(serde_json::from_value(merged)?)
}

/// Machine-readable error printed on stderr before exiting with status 2.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        Self {
            error: e.kind().to_owned(),
            message: e.to_string(),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Pool { input, out } => {
            let matrix = EmbeddingMatrix::from_patch_grids(read_patch_grids(&input)?)?;
            write_embeddings(&matrix, &out)
        }
        Command::Reduce {
            emb,
            input,
            out,
            config,
        } => {
            let config = config.resolve()?;
            let mut reduction = reduce(&read_embeddings(&emb)?, &config)?;
            if let Some(path) = input {
                reduction.projected = Some(project(&reduction.space, &read_embeddings(&path)?)?);
            }
            emit(out.as_deref(), &reduction)
        }
        Command::Diagnose { emb, out, config } => {
            let config = config.resolve()?;
            emit(out.as_deref(), &diagnose(&read_embeddings(&emb)?, &config)?)
        }
        Command::Cluster { input, out, config } => {
            let config = config.resolve()?;
            let reduction: Reduction = serde_json::from_reader(open(&input)?)?;
            emit(out.as_deref(), &cluster(&reduction.space, &config)?)
        }
        Command::Explain {
            emb,
            meta,
            scores,
            out,
            report,
            config,
        } => {
            let config = config.resolve()?;
            let records = read_records(&meta, scores.as_deref())?;
            let session = analyze(&read_embeddings(&emb)?, records, &config)?;
            if let Some(path) = report {
                write_json(&path, &SessionReport::from_session(&session)?)?;
            }
            emit(out.as_deref(), &session)
        }
        Command::Booster {
            session,
            cluster,
            top_n,
            catalog,
            out,
        } => {
            let session = load_session(&session)?;
            let top_n = top_n.unwrap_or(session.config.top_n);
            let mut spec = compose_booster(&session, cluster, top_n)?;
            if let Some(path) = catalog {
                spec = spec.with_matches(&RecordSet::read_catalog(&path)?)?;
            }
            emit(out.as_deref(), &spec)
        }
        Command::Sweep {
            session,
            runs,
            baseline,
            delta,
            min_size,
            out,
        } => {
            let session = load_session(&session)?;
            let delta = delta.unwrap_or(session.config.delta);
            let min_size = min_size.unwrap_or(session.config.min_size);
            let runs = runs
                .iter()
                .map(|p| load_run(p))
                .collect::<Result<Vec<_>, _>>()?;
            let flagged = detect_low_clusters(&session, delta, min_size);
            emit(
                out.as_deref(),
                &sweep_report(&runs, &session, &flagged, &baseline)?,
            )
        }
        Command::Serve { port, host } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::service::serve(&host, port))
        }
    }
}

pub fn load_session(path: &Path) -> Result<Session, Error> {
    let session: Session = serde_json::from_reader(open(path)?)?;
    session.validate()?;
    Ok(session)
}

fn load_run(path: &Path) -> Result<Run, Error> {
    let label = path.file_stem().and_then(|s| s.to_str()).ok_or_else(|| {
        Error::Config(format!("cannot derive a run label from {}", path.display()))
    })?;
    Run::from_csv(label, File::open(path).map_err(with_path(path))?)
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    Ok(BufReader::new(File::open(path).map_err(with_path(path))?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(with_path(path))?;
    Ok(())
}

/// Writes JSON to `out`, or to stdout when no path is given.
fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Error> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
            Ok(())
        }
    }
}
