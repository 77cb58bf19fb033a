//! JSON endpoints over [`RatingService`].

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::service::{RatingService, RatingSubmission, ServiceError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

pub struct ApiError(StatusCode, ErrorBody);

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self(status, ErrorBody { code: code.into(), message: message.into() })
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::Duplicate { .. } => StatusCode::CONFLICT,
            ServiceError::Store { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::EmptyPool | ServiceError::TooLarge { .. } => StatusCode::CONFLICT,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
pub struct RaterQuery {
    #[serde(default)]
    pub rater: String,
}

type Shared = Arc<RatingService>;

async fn create_session(State(svc): State<Shared>, body: Result<Json<CreateSession>, JsonRejection>) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let created = svc.create_session(req.n, req.seed)?;
    Ok((StatusCode::CREATED, Json(created)).into_response())
}

async fn next_sample(State(svc): State<Shared>, Path(id): Path<String>, Query(q): Query<RaterQuery>) -> Result<Response, ApiError> {
    Ok(Json(svc.next_sample(&id, &q.rater)?).into_response())
}

async fn submit_rating(State(svc): State<Shared>, body: Result<Json<RatingSubmission>, JsonRejection>) -> Result<Response, ApiError> {
    let Json(sub) = body?;
    let ack = svc.submit_rating(&sub)?;
    Ok((StatusCode::CREATED, Json(ack)).into_response())
}

async fn progress(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.progress(&id)?).into_response())
}

/// API routes; static files from `static_dir` are served for everything else.
pub fn router(svc: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/next", get(next_sample))
        .route("/api/sessions/{id}/progress", get(progress))
        .route("/api/ratings", post(submit_rating))
        .with_state(svc);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Bind and serve until ctrl-c.
pub async fn serve(svc: Shared, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("rating service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(svc, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
