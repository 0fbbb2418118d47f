//! In-memory session service. Everything is computed once when a session is
//! posted; every GET only reads the stored session.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::multipart::MultipartRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use uuid::Uuid;
use verse_core::clustering::{ClusterDiagnostics, FeasibilityVerdict};
use verse_core::explain::{compose_booster, ClusterProfile, Session, SESSION_SCHEMA_VERSION};
use verse_core::pipeline::analyze;
use verse_core::reduction::{ReducedSpace, ReductionQuality};
use verse_core::report::SessionReport;
use verse_core::tensor_io::{
    decode_embeddings, read_records_from, FeatureKind, FeatureTag, FeatureValue, RecordSet,
};
use verse_core::Error;

use crate::cli::{base_config, config_over_base};
use crate::schema;

/// Largest accepted request body.
pub const BODY_LIMIT: usize = 1 << 30;

pub struct StoredSession {
    pub session: Session,
    pub report: SessionReport,
    pub created_at: SystemTime,
}

#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<Uuid, Arc<StoredSession>>>,
    analyses: AtomicUsize,
}

impl SessionStore {
    pub fn get(&self, id: &Uuid) -> Option<Arc<StoredSession>> {
        self.sessions
            .read()
            .expect("session store poisoned")
            .get(id)
            .cloned()
    }

    /// Publishes a fully built session under a fresh id.
    pub fn insert(&self, stored: StoredSession) -> Uuid {
        let mut sessions = self.sessions.write().expect("session store poisoned");
        let mut id = Uuid::new_v4();
        while sessions.contains_key(&id) {
            id = Uuid::new_v4();
        }
        sessions.insert(id, Arc::new(stored));
        id
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session store poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of full analyses (PCA, clustering, attribution) run so far.
    pub fn analyses(&self) -> usize {
        self.analyses.load(Ordering::SeqCst)
    }
}

#[derive(Clone, Default)]
pub struct AppState {
    pub store: Arc<SessionStore>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(export_session))
        .route("/sessions/{id}/res", get(res))
        .route("/sessions/{id}/clusters", get(clusters))
        .route("/sessions/{id}/overlay", get(overlay))
        .route(
            "/sessions/{id}/clusters/{cluster}/attribution",
            get(attribution),
        )
        .route("/sessions/{id}/booster", post(booster))
        .route("/sessions/{id}/report", get(report))
        .route("/schema", get(schema_index))
        .route("/schema/{name}", get(schema_file))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

pub async fn serve(host: &str, port: u16) -> Result<(), Error> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::default()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: String,
    pub message: String,
    pub fields: Vec<FieldError>,
    pub available: Option<Vec<String>>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "<[FieldError]>::is_empty")]
    fields: &'a [FieldError],
    #[serde(skip_serializing_if = "Option::is_none")]
    available: &'a Option<Vec<String>>,
}

impl ApiError {
    fn new(status: StatusCode, kind: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind: kind.to_owned(),
            message: message.into(),
            fields: Vec::new(),
            available: None,
        }
    }

    fn invalid(field: &str, kind: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        let mut e = Self::new(StatusCode::UNPROCESSABLE_ENTITY, kind, message.clone());
        e.fields.push(FieldError {
            field: field.to_owned(),
            message,
        });
        e
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "UnknownSession",
            format!("no session `{id}`"),
        )
    }

    fn unknown_cluster(cluster: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "UnknownCluster",
            format!("no cluster `{cluster}`"),
        )
    }

    /// A core error attributed to one request field.
    fn from_core(field: &str, e: Error) -> Self {
        match e {
            Error::EmptyCluster(c) => Self::unknown_cluster(&c.to_string()),
            Error::Io(_) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string()),
            e => Self::invalid(field, e.kind(), e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: &self.kind,
            message: &self.message,
            fields: &self.fields,
            available: &self.available,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn lookup(state: &AppState, id: &str) -> ApiResult<Arc<StoredSession>> {
    let uuid = Uuid::parse_str(id).map_err(|_| ApiError::unknown_session(id))?;
    state
        .store
        .get(&uuid)
        .ok_or_else(|| ApiError::unknown_session(id))
}

#[derive(Serialize)]
struct Created {
    id: Uuid,
    n: usize,
    k: usize,
    created_at: u64,
}

#[derive(Default)]
struct Upload {
    embeddings: Option<Bytes>,
    metadata: Option<Bytes>,
    scores: Option<Bytes>,
    config: Option<Bytes>,
    session: Option<Bytes>,
}

async fn create_session(
    State(state): State<AppState>,
    multipart: Result<Multipart, MultipartRejection>,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let mut multipart =
        multipart.map_err(|e| ApiError::invalid("body", "InvalidRequest", e.body_text()))?;
    let mut upload = Upload::default();
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::invalid("body", "InvalidRequest", e.body_text()))?
    {
        let name = field.name().unwrap_or_default().to_owned();
        let slot = match name.as_str() {
            "embeddings" => &mut upload.embeddings,
            "metadata" => &mut upload.metadata,
            "scores" => &mut upload.scores,
            "config" => &mut upload.config,
            "session" => &mut upload.session,
            other => {
                return Err(ApiError::invalid(
                    other,
                    "InvalidRequest",
                    format!("unexpected multipart field `{other}`"),
                ))
            }
        };
        let bytes = field
            .bytes()
            .await
            .map_err(|e| ApiError::invalid(&name, "InvalidRequest", e.body_text()))?;
        *slot = Some(bytes);
    }

    let store = state.store.clone();
    let stored = tokio::task::spawn_blocking(move || build(upload, &store))
        .await
        .map_err(|e| {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string())
        })??;
    let created = Created {
        id: Uuid::nil(),
        n: stored.session.len(),
        k: stored.session.k(),
        created_at: stored
            .created_at
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let id = state.store.insert(stored);
    Ok((StatusCode::CREATED, Json(Created { id, ..created })))
}

fn build(upload: Upload, store: &SessionStore) -> ApiResult<StoredSession> {
    let session = if let Some(raw) = upload.session {
        if upload.embeddings.is_some() || upload.metadata.is_some() {
            return Err(ApiError::invalid(
                "session",
                "InvalidRequest",
                "send either an exported session or embeddings with metadata, not both",
            ));
        }
        let session: Session = serde_json::from_slice(&raw)
            .map_err(|e| ApiError::invalid("session", "JsonError", e.to_string()))?;
        session
            .validate()
            .map_err(|e| ApiError::from_core("session", e))?;
        if session.quality.is_none() {
            return Err(ApiError::invalid(
                "session",
                "InvalidValue",
                "session carries no reduction quality",
            ));
        }
        session
    } else {
        let config = match &upload.config {
            Some(raw) => serde_json::from_slice(raw)
                .map_err(Error::from)
                .and_then(config_over_base)
                .map_err(|e| ApiError::invalid("config", "ConfigError", e.to_string()))?,
            None => base_config().map_err(|e| ApiError::from_core("config", e))?,
        };
        config
            .validate()
            .map_err(|e| ApiError::from_core("config", e))?;
        let embeddings = upload.embeddings.ok_or_else(|| {
            ApiError::invalid(
                "embeddings",
                "MissingField",
                "the `embeddings` part is required",
            )
        })?;
        let metadata = upload.metadata.ok_or_else(|| {
            ApiError::invalid(
                "metadata",
                "MissingField",
                "the `metadata` part is required",
            )
        })?;
        let matrix =
            decode_embeddings(&embeddings).map_err(|e| ApiError::from_core("embeddings", e))?;
        let records =
            read_records_from(metadata.as_ref(), upload.scores.as_deref()).map_err(|e| {
                let field = match e {
                    Error::ScoreOutOfRange { .. } | Error::UnknownScoreId(_) => "scores",
                    _ => "metadata",
                };
                ApiError::from_core(field, e)
            })?;
        store.analyses.fetch_add(1, Ordering::SeqCst);
        analyze(&matrix, records, &config).map_err(|e| {
            let field = match e {
                Error::JoinMismatch { .. } | Error::ScoreMissing => "metadata",
                _ => "config",
            };
            ApiError::from_core(field, e)
        })?
    };
    let report =
        SessionReport::from_session(&session).map_err(|e| ApiError::from_core("session", e))?;
    Ok(StoredSession {
        session,
        report,
        created_at: SystemTime::now(),
    })
}

async fn export_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let stored = lookup(&state, &id)?;
    Ok(Json(&stored.session).into_response())
}

#[derive(Serialize)]
struct ResView<'a> {
    schema_version: u32,
    #[serde(flatten)]
    space: &'a ReducedSpace,
    quality: &'a Option<ReductionQuality>,
}

async fn res(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let stored = lookup(&state, &id)?;
    let view = ResView {
        schema_version: SESSION_SCHEMA_VERSION,
        space: &stored.session.reduced,
        quality: &stored.session.quality,
    };
    Ok(Json(view).into_response())
}

#[derive(Serialize)]
struct ClustersView<'a> {
    schema_version: u32,
    k: usize,
    sizes: Vec<usize>,
    assignments: &'a [usize],
    centroids: &'a [Vec<f64>],
    per_sample_silhouette: &'a [f64],
    diagnostics: &'a ClusterDiagnostics,
    verdict: &'a FeasibilityVerdict,
    flagged: &'a [usize],
    profiles: &'a [ClusterProfile],
}

async fn clusters(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let stored = lookup(&state, &id)?;
    let analysis = &stored.session.clusters;
    let view = ClustersView {
        schema_version: SESSION_SCHEMA_VERSION,
        k: analysis.model.k,
        sizes: analysis.model.sizes(),
        assignments: &analysis.model.assignments,
        centroids: &analysis.model.centroids,
        per_sample_silhouette: &analysis.model.per_sample_silhouette,
        diagnostics: &analysis.diagnostics,
        verdict: &analysis.verdict,
        flagged: &stored.report.flagged,
        profiles: &stored.report.profiles,
    };
    Ok(Json(view).into_response())
}

#[derive(Deserialize)]
struct OverlayQuery {
    feature: Option<String>,
}

#[derive(Serialize)]
struct OverlayView<'a> {
    schema_version: u32,
    feature: &'a str,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    tag: Option<FeatureTag>,
    ids: &'a [String],
    values: Vec<serde_json::Value>,
}

async fn overlay(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<OverlayQuery>,
) -> ApiResult<Response> {
    let stored = lookup(&state, &id)?;
    let session = &stored.session;
    let feature = query
        .feature
        .as_deref()
        .filter(|f| !f.is_empty())
        .unwrap_or("score");
    let ids = session.ids();
    let view = if feature == "score" {
        let values = session
            .records
            .iter()
            .map(|r| json_number(r.score))
            .collect();
        OverlayView {
            schema_version: SESSION_SCHEMA_VERSION,
            feature,
            kind: "score",
            tag: None,
            ids,
            values,
        }
    } else {
        let column = session.column(feature).ok_or_else(|| {
            let mut available = vec!["score".to_owned()];
            available.extend(session.columns.iter().map(|c| c.name.clone()));
            let mut e = ApiError::invalid(
                "feature",
                "UnknownFeature",
                format!(
                    "unknown feature `{feature}`; available: {}",
                    available.join(", ")
                ),
            );
            e.available = Some(available);
            e
        })?;
        let values = session
            .records
            .iter()
            .map(|r| match r.feature(feature) {
                Some(FeatureValue::Numeric(x)) => json_number(Some(*x)),
                Some(FeatureValue::Categorical(s)) => serde_json::Value::String(s.clone()),
                None => serde_json::Value::Null,
            })
            .collect();
        let kind = match column.kind {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Categorical => "categorical",
        };
        OverlayView {
            schema_version: SESSION_SCHEMA_VERSION,
            feature,
            kind,
            tag: column.tag,
            ids,
            values,
        }
    };
    Ok(Json(view).into_response())
}

fn json_number(x: Option<f64>) -> serde_json::Value {
    x.and_then(serde_json::Number::from_f64)
        .map_or(serde_json::Value::Null, serde_json::Value::Number)
}

async fn attribution(
    State(state): State<AppState>,
    Path((id, cluster)): Path<(String, String)>,
) -> ApiResult<Response> {
    let stored = lookup(&state, &id)?;
    let profile = cluster
        .parse::<usize>()
        .ok()
        .and_then(|c| stored.report.profiles.get(c))
        .ok_or_else(|| ApiError::unknown_cluster(&cluster))?;
    Ok(Json(profile).into_response())
}

async fn report(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let stored = lookup(&state, &id)?;
    Ok(Json(&stored.report).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoosterRequest {
    cluster: usize,
    top_n: Option<usize>,
    catalog: Option<CatalogInput>,
}

/// Catalog as metadata CSV text or as an array of flat JSON records.
#[derive(Deserialize)]
#[serde(untagged)]
enum CatalogInput {
    Csv(String),
    Records(Vec<serde_json::Map<String, serde_json::Value>>),
}

impl CatalogInput {
    fn parse(self) -> Result<RecordSet, Error> {
        match self {
            CatalogInput::Csv(text) => read_records_from::<_, &[u8]>(text.as_bytes(), None),
            CatalogInput::Records(rows) => {
                let mut lines = String::new();
                for row in rows {
                    lines.push_str(&serde_json::to_string(&row)?);
                    lines.push('\n');
                }
                RecordSet::from_json_lines(lines.as_bytes())
            }
        }
    }
}

async fn booster(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let stored = lookup(&state, &id)?;
    let request: BoosterRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::invalid("body", "JsonError", e.to_string()))?;
    let session = &stored.session;
    if request.cluster >= session.k() {
        return Err(ApiError::unknown_cluster(&request.cluster.to_string()));
    }
    let top_n = request.top_n.unwrap_or(session.config.top_n);
    let mut spec = compose_booster(session, request.cluster, top_n)
        .map_err(|e| ApiError::from_core("top_n", e))?;
    if let Some(catalog) = request.catalog {
        let catalog = catalog
            .parse()
            .map_err(|e| ApiError::from_core("catalog", e))?;
        spec = spec
            .with_matches(&catalog)
            .map_err(|e| ApiError::from_core("catalog", e))?;
    }
    Ok(Json(spec).into_response())
}

#[derive(Serialize)]
struct SchemaIndex {
    schemas: Vec<&'static str>,
}

async fn schema_index() -> Json<SchemaIndex> {
    Json(SchemaIndex {
        schemas: schema::SCHEMAS.iter().map(|(name, _)| *name).collect(),
    })
}

async fn schema_file(Path(name): Path<String>) -> ApiResult<Response> {
    let name = name.strip_suffix(".json").unwrap_or(&name);
    let body = schema::get(name).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "UnknownSchema",
            format!("no schema `{name}`"),
        )
    })?;
    Ok(([(header::CONTENT_TYPE, "application/schema+json")], body).into_response())
}
