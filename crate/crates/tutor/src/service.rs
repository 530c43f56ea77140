//! HTTP interface. All bodies are JSON; unknown input fields are ignored.
//!
//! | method | path                       | body / query               | answer            |
//! |--------|----------------------------|----------------------------|-------------------|
//! | GET    | `/exercises`               |                            | `[{id, title}]`   |
//! | GET    | `/exercises/{id}`          |                            | exercise view     |
//! | POST   | `/sessions`                | `{exercise, group?}`       | `{session}` (201) |
//! | GET    | `/sessions/{id}`           |                            | session view      |
//! | POST   | `/sessions/{id}/actions`   | `{task, kind, payload}`, `?lang=` | action result |
//! | GET    | `/stats`                   | `?exercise=&group=`        | stat report       |
//!
//! Errors answer `{error, message, field?}` with 404 for unknown ids, 409
//! while another action on the session is in flight, 422 for malformed
//! input and 503 when the event log cannot be written.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::engine::Engine;
use crate::log::EventLog;
use crate::messages::{resolve_report, Language, ResolvedItem, WireVerdict};
use crate::session::{Action, EngineError, FieldError, Settings, StateDelta};
use crate::stats::StatFilter;

#[derive(Clone)]
struct AppState {
    engine: Arc<Engine>,
    language: Language,
}

pub fn router(engine: Arc<Engine>, language: Language) -> Router {
    Router::new()
        .route("/exercises", get(list_exercises))
        .route("/exercises/{id}", get(get_exercise))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/actions", post(post_action))
        .route("/stats", get(get_stats))
        .with_state(AppState { engine, language })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>, field: Option<&str>) -> Self {
        ApiError {
            status,
            body: ErrorBody { error: error.into(), message: message.into(), field: field.map(str::to_string) },
        }
    }

    fn field(e: FieldError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed", e.message, Some(&e.field))
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let message = e.to_string();
        let (status, code, field) = match e {
            EngineError::SessionNotFound(_) | EngineError::ExerciseNotFound(_) => {
                (StatusCode::NOT_FOUND, "not-found", None)
            }
            EngineError::TaskNotActive { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "task-not-active", Some("task")),
            EngineError::MalformedAction(_) => (StatusCode::UNPROCESSABLE_ENTITY, "malformed", Some("payload")),
            EngineError::UnknownOption(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "unknown-option", Some("payload.variables"))
            }
            EngineError::Busy => (StatusCode::CONFLICT, "busy", None),
            EngineError::Storage(_) => (StatusCode::SERVICE_UNAVAILABLE, "storage", None),
            EngineError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", None),
        };
        ApiError::new(status, code, message, field)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut response = (self.status, Json(self.body)).into_response();
        if self.status == StatusCode::CONFLICT {
            response.headers_mut().insert(header::RETRY_AFTER, "1".parse().expect("static header"));
        }
        response
    }
}

/// What `POST /sessions/{id}/actions` answers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionResponse {
    pub accepted: bool,
    pub verdict: WireVerdict,
    pub items: Vec<ResolvedItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<StateDelta>,
}

#[derive(Debug, Deserialize)]
struct NewSession {
    exercise: String,
    #[serde(default)]
    group: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session: String,
}

#[derive(Debug, Deserialize)]
struct LangQuery {
    lang: Option<String>,
}

async fn list_exercises(State(app): State<AppState>) -> impl IntoResponse {
    Json(app.engine.exercises())
}

async fn get_exercise(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(app.engine.exercise_view(&id)?))
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(&body);
    let request: NewSession = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let field = if field == "." { "exercise".to_string() } else { field };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed", e.inner().to_string(), Some(&field))
    })?;
    let session = app.engine.create_session(&request.exercise, request.group)?;
    Ok((StatusCode::CREATED, Json(SessionCreated { session })))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(app.engine.session_view(&id)?))
}

async fn post_action(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<LangQuery>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let lang = match query.lang {
        Some(l) => l
            .parse::<Language>()
            .map_err(|m| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed", m, Some("lang")))?,
        None => app.language,
    };
    let action = Action::from_json(&body).map_err(ApiError::field)?;
    let engine = app.engine.clone();
    // Feedback search and the log sync may take a while; keep them off the
    // async workers.
    let (dispatched, _) = tokio::task::spawn_blocking(move || engine.act(&id, action))
        .await
        .map_err(|e| ApiError::from(EngineError::Internal(e.to_string())))??;
    let resolved = resolve_report(&dispatched.result.report, lang);
    Ok(Json(ActionResponse {
        accepted: dispatched.result.accepted,
        verdict: resolved.verdict,
        items: resolved.items,
        delta: dispatched.result.delta,
    }))
}

async fn get_stats(
    State(app): State<AppState>,
    Query(filter): Query<StatFilter>,
) -> Result<impl IntoResponse, ApiError> {
    let engine = app.engine.clone();
    let report = tokio::task::spawn_blocking(move || engine.stats(&filter))
        .await
        .map_err(|e| ApiError::from(EngineError::Internal(e.to_string())))??;
    Ok(Json(report))
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Exercises(String),
}

/// Builds the engine described by `config`: opens the log, loads the
/// exercises and restores saved sessions.
pub fn build_engine(config: &Config) -> Result<Engine, ServeError> {
    let (log, warnings) = EventLog::open(&config.log)?;
    for w in warnings {
        tracing::warn!("{}: {w}", config.log.display());
    }
    let settings = Settings { limits: config.search.limits(), ..Settings::default() };
    let mut engine = Engine::new(settings, Some(log));
    let report = engine.load_dir(&config.exercises)?;
    for (path, w) in &report.warnings {
        tracing::warn!("{}: {w}", path.display());
    }
    if !report.errors.is_empty() {
        let lines: Vec<String> = report.errors.iter().map(|(p, e)| format!("{}: {e}", p.display())).collect();
        return Err(ServeError::Exercises(lines.join("\n")));
    }
    tracing::info!(count = report.loaded.len(), "exercises loaded");
    if let Some(dir) = &config.snapshots {
        let (restored, warnings) = engine.restore_snapshots(dir)?;
        for w in warnings {
            tracing::warn!("{w}");
        }
        tracing::info!(restored, "sessions restored");
    }
    Ok(engine)
}

/// Serves until Ctrl-C, persisting snapshots periodically and on exit.
pub async fn serve(config: Config) -> Result<(), ServeError> {
    let engine = Arc::new(build_engine(&config)?);
    let listener = tokio::net::TcpListener::bind(&config.listen).await?;
    tracing::info!(address = %listener.local_addr()?, "listening");
    if let Some(dir) = config.snapshots.clone() {
        let engine = engine.clone();
        let period = Duration::from_secs(config.snapshot_interval_secs.max(1));
        tokio::spawn(async move {
            let mut ticker = tokio::time::interval(period);
            ticker.tick().await;
            loop {
                ticker.tick().await;
                let (engine, dir) = (engine.clone(), dir.clone());
                match tokio::task::spawn_blocking(move || engine.persist_snapshots(&dir)).await {
                    Ok(Ok(_)) => {}
                    Ok(Err(e)) => tracing::warn!("snapshot failed: {e}"),
                    Err(e) => tracing::warn!("snapshot task failed: {e}"),
                }
            }
        });
    }
    let app = router(engine.clone(), config.language);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(dir) = &config.snapshots {
        let written = engine.persist_snapshots(dir)?;
        tracing::info!(written, "snapshots saved");
    }
    Ok(())
}
