//! HTTP routes.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, FromRequestParts, Path, Query, State};
use axum::http::header::{AUTHORIZATION, CONTENT_DISPOSITION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use holoviz_core::ingest::{CsvOptions, ParseError};
use holoviz_core::render::{encode_image, ImageFormat, Parallelism};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use crate::ops::{self, QuiltParams, SceneRequest, ServiceError, VisualizationInput};
use crate::store::{Namespace, Store};

/// Largest accepted CSV upload.
pub const MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;
/// Largest accepted JSON body.
pub const MAX_JSON_BYTES: usize = 4 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ApiConfig {
    /// Every request acts in the local namespace and no token is needed.
    pub single_user: bool,
    /// Quilt renders allowed to run at once.
    pub max_renders: usize,
    /// Static files served at `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ApiConfig {
    fn default() -> Self {
        Self {
            single_user: false,
            max_renders: 2,
            ui_dir: None,
        }
    }
}

#[derive(Clone)]
struct AppState {
    store: Arc<Store>,
    single_user: bool,
    renders: Arc<Semaphore>,
}

pub fn router(store: Arc<Store>, config: ApiConfig) -> Router {
    let state = AppState {
        store,
        single_user: config.single_user,
        renders: Arc::new(Semaphore::new(config.max_renders.max(1))),
    };
    let api = Router::new()
        .route("/api/health", get(health))
        .route(
            "/api/datasets",
            post(upload_dataset).layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES)),
        )
        .route("/api/datasets/{id}", get(get_dataset))
        .route("/api/scenes", post(create_scene))
        .route("/api/scenes/{id}", get(get_scene))
        .route("/api/scenes/{id}/quilt", get(get_quilt))
        .route("/api/visualizations", get(list_visualizations))
        .route(
            "/api/visualizations/{id}",
            put(put_visualization).get(get_visualization),
        )
        .layer(DefaultBodyLimit::max(MAX_JSON_BYTES))
        .with_state(state);
    match config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(placeholder)),
    }
}

/// A [`ServiceError`] rendered as a JSON response.
#[derive(Debug)]
pub struct ApiError(pub ServiceError);

impl<E: Into<ServiceError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

pub fn status_of(error: &ServiceError) -> StatusCode {
    match error {
        ServiceError::Parse(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
        ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
        ServiceError::NotFound { .. } => StatusCode::NOT_FOUND,
        ServiceError::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
        ServiceError::Mapping(_) | ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
        ServiceError::Corrupt { .. }
        | ServiceError::Store(_)
        | ServiceError::Image(_)
        | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn code_of(error: &ServiceError) -> &'static str {
    match error {
        ServiceError::Parse(_) => "parse_error",
        ServiceError::BadRequest(_) => "bad_request",
        ServiceError::Unauthorized => "unauthorized",
        ServiceError::NotFound { .. } => "not_found",
        ServiceError::TooLarge { .. } => "too_large",
        ServiceError::Mapping(_) => "invalid_mapping",
        ServiceError::Invalid(_) => "invalid",
        ServiceError::Corrupt { .. }
        | ServiceError::Store(_)
        | ServiceError::Image(_)
        | ServiceError::Internal(_) => "internal",
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let error = self.0;
        let mut body = json!({ "error": code_of(&error), "message": error.to_string() });
        match &error {
            ServiceError::Parse(e) => {
                if let Some(line) = e.line() {
                    body["line"] = line.into();
                }
            }
            ServiceError::Mapping(problems) => {
                body["diagnostics"] = problems
                    .iter()
                    .map(|p| {
                        let mut v = serde_json::to_value(p).expect("diagnostics serialize");
                        v["message"] = p.to_string().into();
                        v
                    })
                    .collect::<Vec<Value>>()
                    .into();
            }
            _ => {}
        }
        let mut response = (status_of(&error), Json(body)).into_response();
        if matches!(error, ServiceError::Unauthorized) {
            response
                .headers_mut()
                .insert("www-authenticate", "Bearer".parse().expect("static header"));
        }
        response
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// The namespace a request acts in.
struct Caller(Namespace);

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> ApiResult<Self> {
        if state.single_user {
            return Ok(Caller(Namespace::local()));
        }
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(|t| t.trim().to_owned())
            .ok_or(ServiceError::Unauthorized)?;
        let store = state.store.clone();
        let ns = blocking(move || Ok(store.resolve_token(&token)?)).await?;
        ns.map(Caller).ok_or(ApiError(ServiceError::Unauthorized))
    }
}

/// Run blocking store or render work off the async workers.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
        .map_err(ApiError)
}

fn body_bytes(body: Result<Bytes, BytesRejection>) -> ApiResult<Bytes> {
    body.map_err(|e| match e.status() {
        StatusCode::PAYLOAD_TOO_LARGE => ApiError(ServiceError::TooLarge {
            limit: MAX_UPLOAD_BYTES,
        }),
        _ => ApiError(ServiceError::BadRequest(e.body_text())),
    })
}

fn json_body<T: DeserializeOwned>(body: Result<Bytes, BytesRejection>) -> ApiResult<T> {
    let bytes = body_bytes(body)?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ApiError(ServiceError::BadRequest(format!(
            "at {path}: {}",
            e.into_inner()
        )))
    })
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(t)| t)
        .map_err(|e| ApiError(ServiceError::BadRequest(e.body_text())))
}

fn json_document(status: StatusCode, bytes: Vec<u8>) -> Response {
    (status, [(CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn placeholder() -> Html<&'static str> {
    Html(
        "<!doctype html><title>holoviz</title>\
         <p>holoviz API server. Start with <code>--ui-dir</code> to serve the web client.</p>",
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UploadQuery {
    delimiter: Option<String>,
    has_header: Option<bool>,
}

impl UploadQuery {
    fn options(&self) -> Result<CsvOptions, ServiceError> {
        let mut options = CsvOptions::default();
        if let Some(d) = &self.delimiter {
            let mut chars = d.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => options.delimiter = c,
                _ => {
                    return Err(ServiceError::BadRequest(format!(
                        "delimiter must be one character, got {d:?}"
                    )))
                }
            }
        }
        if let Some(h) = self.has_header {
            options.has_header = h;
        }
        Ok(options)
    }
}

async fn upload_dataset(
    State(state): State<AppState>,
    Caller(ns): Caller,
    q: Result<Query<UploadQuery>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Response> {
    let options = query(q)?.options()?;
    let bytes = body_bytes(body)?;
    if bytes.is_empty() {
        return Err(ServiceError::Parse(ParseError::EmptyInput).into());
    }
    let store = state.store.clone();
    let summary = blocking(move || ops::ingest(&store, &ns, &bytes, &options)).await?;
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn get_dataset(
    State(state): State<AppState>,
    Caller(ns): Caller,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let store = state.store.clone();
    let dataset = blocking(move || ops::load_dataset(&store, &ns, &id)).await?;
    Ok(Json(ops::DatasetSummary::from(&dataset)).into_response())
}

async fn create_scene(
    State(state): State<AppState>,
    Caller(ns): Caller,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Response> {
    let request: SceneRequest = json_body(body)?;
    let store = state.store.clone();
    let created = blocking(move || ops::create_scene(&store, &ns, request)).await?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn get_scene(
    State(state): State<AppState>,
    Caller(ns): Caller,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let store = state.store.clone();
    let bytes = blocking(move || ops::scene_bytes(&store, &ns, &id)).await?;
    Ok(json_document(StatusCode::OK, bytes))
}

async fn get_quilt(
    State(state): State<AppState>,
    Caller(ns): Caller,
    Path(id): Path<String>,
    q: Result<Query<QuiltParams>, QueryRejection>,
) -> ApiResult<Response> {
    let config = query(q)?.to_config()?;
    let store = state.store.clone();
    let scene = {
        let id = id.clone();
        blocking(move || ops::load_scene(&store, &ns, &id)).await?
    };
    let _permit = state
        .renders
        .clone()
        .acquire_owned()
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?;
    let file_name = config.file_name(&id);
    let png = blocking(move || {
        let quilt = ops::render(&scene, &config, Parallelism::Global)?;
        Ok(encode_image(&quilt.pixels, ImageFormat::Png)?)
    })
    .await?;
    Ok((
        [
            (CONTENT_TYPE, "image/png".to_owned()),
            (
                CONTENT_DISPOSITION,
                format!("inline; filename=\"{file_name}\""),
            ),
        ],
        png,
    )
        .into_response())
}

async fn put_visualization(
    State(state): State<AppState>,
    Caller(ns): Caller,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Response> {
    let input: VisualizationInput = json_body(body)?;
    let store = state.store.clone();
    let (bytes, created) =
        blocking(move || ops::save_visualization(&store, &ns, &id, input)).await?;
    let status = if created {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok(json_document(status, bytes))
}

async fn get_visualization(
    State(state): State<AppState>,
    Caller(ns): Caller,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let store = state.store.clone();
    let bytes = blocking(move || ops::visualization_bytes(&store, &ns, &id)).await?;
    Ok(json_document(StatusCode::OK, bytes))
}

async fn list_visualizations(
    State(state): State<AppState>,
    Caller(ns): Caller,
) -> ApiResult<Response> {
    let store = state.store.clone();
    let entries = blocking(move || ops::list_visualizations(&store, &ns)).await?;
    Ok(Json(entries).into_response())
}
