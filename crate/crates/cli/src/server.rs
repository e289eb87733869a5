//! Read-only HTTP service over one embedding database.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tower_http::services::ServeDir;

use repurpose::coldstart::EmbeddingDatabase;

use crate::api::{self, ApiError, ModelInfo, ParseRequest, PredictRequest};

type Db = Arc<EmbeddingDatabase>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("InvalidRequest", e.body_text()))
}

async fn parse(payload: Result<Json<ParseRequest>, JsonRejection>) -> Response {
    match body(payload).and_then(|req| api::parse(&req.smiles)) {
        Ok(graph) => Json(graph).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn predict(State(db): State<Db>, payload: Result<Json<PredictRequest>, JsonRejection>) -> Response {
    match body(payload).and_then(|req| api::predict(&db, &req)) {
        Ok(r) => Json(r).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn diseases(State(db): State<Db>) -> Response {
    Json(api::diseases(&db)).into_response()
}

async fn model(State(db): State<Db>) -> Response {
    Json(ModelInfo::of(&db)).into_response()
}

/// The API routes, with static files from `static_dir` for anything else.
pub fn router(db: Db, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/parse", post(parse))
        .route("/api/predict", post(predict))
        .route("/api/diseases", get(diseases))
        .route("/api/model", get(model))
        .with_state(db);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(db: Db, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(db, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
