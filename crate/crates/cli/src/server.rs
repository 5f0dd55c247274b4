//! HTTP JSON service over live incident sessions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use grounding_core::model::{IncidentConfig, ModelConfig, ShipParticulars};
use grounding_core::session::LogRecord;
use grounding_core::{Evidence, EvidenceId, IncidentSession, PosteriorReport, SessionError};
use log::{info, warn};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

/// Environment variable overriding the session data directory.
pub const DATA_DIR_ENV: &str = "GROUNDING_DATA_DIR";

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{reason}")]
    MalformedBody { path: String, reason: String },
    #[error("no incident with id {0}")]
    IncidentNotFound(String),
    #[error("incident {0} already exists")]
    IncidentExists(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("background task failed: {0}")]
    Internal(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        use SessionError as S;
        match self {
            ApiError::MalformedBody { .. } => StatusCode::BAD_REQUEST,
            ApiError::IncidentNotFound(_) | ApiError::Session(S::UnknownEvidenceId(_)) => StatusCode::NOT_FOUND,
            ApiError::IncidentExists(_) | ApiError::Session(S::ImpossibleEvidence | S::AlreadyRetracted(_)) => {
                StatusCode::CONFLICT
            }
            ApiError::Session(S::Io(_)) | ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ApiError::Session(_) => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }

    fn kind(&self) -> &'static str {
        use SessionError as S;
        match self {
            ApiError::MalformedBody { .. } => "malformed_body",
            ApiError::IncidentNotFound(_) => "incident_not_found",
            ApiError::IncidentExists(_) => "incident_exists",
            ApiError::Internal(_) => "internal",
            ApiError::Session(e) => match e {
                S::Model(_) => "invalid_configuration",
                S::Inference(_) => "inference",
                S::UnknownNode(_) => "unknown_node",
                S::NotObservable(_) => "not_observable",
                S::OutOfRangeValue { .. } => "out_of_range_value",
                S::InvalidValue { .. } => "invalid_value",
                S::ImpossibleEvidence => "impossible_evidence",
                S::UnknownEvidenceId(_) => "unknown_evidence_id",
                S::AlreadyRetracted(_) => "already_retracted",
                S::CorruptFile(_) => "corrupt_file",
                S::VersionMismatch { .. } => "version_mismatch",
                S::Io(_) => "io",
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        match &self {
            ApiError::MalformedBody { path, .. } => body["path"] = json!(path),
            ApiError::Session(SessionError::OutOfRangeValue { node, lo, hi, .. }) => {
                body["node"] = json!(node);
                body["admissible"] = json!([lo, hi]);
            }
            _ => {}
        }
        (self.status(), Json(json!({ "error": body }))).into_response()
    }
}

type Shared = Arc<RwLock<IncidentSession>>;

/// Live sessions, optionally mirrored to a data directory.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Shared>>>,
    data_dir: Option<PathBuf>,
}

impl AppState {
    pub fn in_memory() -> Self {
        AppState::default()
    }

    /// Loads every `*.json` session under `dir`; unreadable files are skipped with a warning.
    pub fn with_data_dir(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let probe = dir.join(".write-probe");
        std::fs::write(&probe, b"")?;
        std::fs::remove_file(&probe)?;
        let mut sessions = HashMap::new();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                match IncidentSession::load(&path) {
                    Ok(s) => {
                        info!("restored incident {}", s.id());
                        sessions.insert(s.id().to_string(), Arc::new(RwLock::new(s)));
                    }
                    Err(e) => warn!("skipping {}: {e}", path.display()),
                }
            }
        }
        Ok(AppState {
            sessions: Arc::new(RwLock::new(sessions)),
            data_dir: Some(dir),
        })
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("sessions lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::IncidentNotFound(id.into()))
    }

    fn persist(&self, session: &IncidentSession) -> Result<(), ApiError> {
        if let Some(dir) = &self.data_dir {
            session.save(session_path(dir, session.id()))?;
        }
        Ok(())
    }

    /// Writes every session to the data directory.
    pub fn flush(&self) {
        let sessions: Vec<Shared> = self.sessions.read().expect("sessions lock").values().cloned().collect();
        for s in sessions {
            let s = s.read().expect("session lock");
            if let Err(e) = self.persist(&s) {
                warn!("could not save incident {}: {e}", s.id());
            }
        }
    }
}

fn session_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.json"))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/incidents", post(create_incident))
        .route("/incidents/{id}", get(get_incident))
        .route("/incidents/{id}/evidence", post(add_evidence))
        .route("/incidents/{id}/evidence/{eid}", delete(retract_evidence))
        .route("/incidents/{id}/posteriors", get(posteriors))
        .route("/incidents/{id}/what-if", post(what_if))
        .with_state(state)
}

/// Deserializes a JSON body, reporting the offending field path.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| ApiError::MalformedBody {
        path: e.path().to_string(),
        reason: e.inner().to_string(),
    })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "incidents": state.len() }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateIncident {
    #[serde(default)]
    id: Option<String>,
    ship: ShipParticulars,
    #[serde(default)]
    model: ModelConfig,
    #[serde(default)]
    incident: IncidentConfig,
    #[serde(default)]
    evidence: Vec<Evidence>,
}

#[derive(Serialize)]
struct IncidentView {
    id: String,
    structure_hash: String,
    log_hash: String,
    evidence: Vec<ActiveEvidence>,
    warnings: Vec<String>,
    posteriors: PosteriorReport,
}

#[derive(Serialize)]
struct ActiveEvidence {
    id: EvidenceId,
    #[serde(flatten)]
    evidence: Evidence,
}

fn view(s: &IncidentSession) -> Result<IncidentView, ApiError> {
    Ok(IncidentView {
        id: s.id().to_string(),
        structure_hash: s.structure_hash().to_string(),
        log_hash: s.log_hash(),
        evidence: s
            .active_evidence()
            .into_iter()
            .map(|(id, evidence)| ActiveEvidence { id, evidence })
            .collect(),
        warnings: s.warnings().to_vec(),
        posteriors: s.report(&[])?,
    })
}

async fn create_incident(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateIncident = parse_body(&body)?;
    if let Some(id) = &req.id {
        let ok = !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !ok {
            return Err(ApiError::MalformedBody {
                path: "id".into(),
                reason: "must be 1 to 64 ASCII letters, digits, '-' or '_'".into(),
            });
        }
        if state.get(id).is_ok() {
            return Err(ApiError::IncidentExists(id.clone()));
        }
    }
    let state2 = state.clone();
    let out = blocking(move || {
        let mut s = match req.id {
            Some(id) => IncidentSession::with_id(id, req.ship, req.model, req.incident)?,
            None => IncidentSession::create(req.ship, req.model, req.incident)?,
        };
        if !req.evidence.is_empty() {
            s.add_evidence_batch(req.evidence)?;
        }
        state2.persist(&s)?;
        let v = view(&s)?;
        state2
            .sessions
            .write()
            .expect("sessions lock")
            .insert(s.id().to_string(), Arc::new(RwLock::new(s)));
        Ok(v)
    })
    .await?;
    info!("created incident {}", out.id);
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn get_incident(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let shared = state.get(&id)?;
    let out = blocking(move || {
        let s = shared.read().expect("session lock");
        let log: Vec<LogRecord> = s.log().to_vec();
        let v = view(&s)?;
        Ok(json!({
            "incident": v,
            "ship": s.ship(),
            "model": s.model_config(),
            "config": s.incident(),
            "log": log,
        }))
    })
    .await?;
    Ok(Json(out).into_response())
}

/// One evidence object or an array of them.
fn parse_evidence(body: &Bytes) -> Result<Vec<Evidence>, ApiError> {
    let value: serde_json::Value = parse_body(body)?;
    if value.is_array() {
        parse_body::<Vec<Evidence>>(body)
    } else {
        parse_body::<Evidence>(body).map(|e| vec![e])
    }
}

async fn add_evidence(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let batch = parse_evidence(&body)?;
    let shared = state.get(&id)?;
    let out = blocking(move || {
        let mut s = shared.write().expect("session lock");
        let ids = s.add_evidence_batch(batch)?;
        state.persist(&s)?;
        Ok(json!({ "ids": ids, "incident": view(&s)? }))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn retract_evidence(
    State(state): State<AppState>,
    UrlPath((id, eid)): UrlPath<(String, u64)>,
) -> Result<Response, ApiError> {
    let shared = state.get(&id)?;
    let out = blocking(move || {
        let mut s = shared.write().expect("session lock");
        s.retract_evidence(EvidenceId(eid))?;
        state.persist(&s)?;
        view(&s)
    })
    .await?;
    Ok(Json(out).into_response())
}

#[derive(Deserialize)]
struct NodesQuery {
    nodes: Option<String>,
}

fn split_nodes(nodes: Option<&str>) -> Vec<String> {
    nodes
        .map(|n| n.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
        .unwrap_or_default()
}

async fn posteriors(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<NodesQuery>,
) -> Result<Response, ApiError> {
    let shared = state.get(&id)?;
    let nodes = split_nodes(q.nodes.as_deref());
    let out = blocking(move || Ok(shared.read().expect("session lock").report(&nodes)?)).await?;
    Ok(Json(out).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIf {
    evidence: Vec<Evidence>,
    #[serde(default)]
    nodes: Vec<String>,
}

async fn what_if(State(state): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> Result<Response, ApiError> {
    let value: serde_json::Value = parse_body(&body)?;
    let req = if value.is_array() {
        WhatIf {
            evidence: parse_body(&body)?,
            nodes: Vec::new(),
        }
    } else {
        parse_body(&body)?
    };
    let shared = state.get(&id)?;
    let out = blocking(move || {
        let s = shared.read().expect("session lock");
        let report = s.what_if_report(&req.evidence, &req.nodes)?;
        Ok(json!({ "log_hash": s.log_hash(), "posteriors": report }))
    })
    .await?;
    Ok(Json(out).into_response())
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("data directory {path} is not writable: {reason}")]
    DataDirUnwritable { path: String, reason: String },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Binds `port` and serves until interrupted, then writes all sessions.
pub async fn serve(port: u16, data_dir: Option<PathBuf>) -> Result<(), ServeError> {
    let state = match data_dir {
        Some(dir) => AppState::with_data_dir(&dir).map_err(|e| ServeError::DataDirUnwritable {
            path: dir.display().to_string(),
            reason: e.to_string(),
        })?,
        None => AppState::in_memory(),
    };
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            ServeError::PortInUse(port)
        } else {
            ServeError::Io(e)
        }
    })?;
    info!("listening on {}", listener.local_addr()?);
    let app = router(state.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    state.flush();
    info!("saved {} incidents", state.len());
    Ok(())
}
