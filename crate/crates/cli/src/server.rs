//! HTTP routes over one shared data graph.

use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use exemplar_core::{DataGraph, Engine, Error};
use serde::Deserialize;

use crate::api::{ErrorBody, QueryRequest, QueryResponse, Suggestion};

pub type SharedGraph = Arc<DataGraph>;

pub fn router(graph: SharedGraph) -> Router {
    Router::new()
        .route("/api/query", post(query))
        .route("/api/autocomplete", get(autocomplete))
        .route("/api/health", get(health))
        .with_state(graph)
}

pub struct ApiError(Error);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::UnknownEntity(_) => StatusCode::NOT_FOUND,
            Error::ArityMismatch { .. } | Error::InvalidTuple(_) | Error::InvalidParameter(_) => StatusCode::BAD_REQUEST,
            Error::DisconnectedTuple { .. } | Error::QueryGraphTooLarge(_) | Error::RowLimit { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let entity = match &self.0 {
            Error::UnknownEntity(name) => Some(name.clone()),
            _ => None,
        };
        let body = ErrorBody {
            error: self.0.to_string(),
            entity,
        };
        (status, Json(body)).into_response()
    }
}

async fn query(State(graph): State<SharedGraph>, Json(req): Json<QueryRequest>) -> Result<Json<QueryResponse>, ApiError> {
    let result = tokio::task::spawn_blocking(move || {
        let engine = Engine::new(&graph);
        let outcome = engine.query(&req.tuples, &req.params())?;
        Ok::<_, Error>(QueryResponse {
            mqg: outcome.prepared.mqg.edge_views(&graph),
            answers: outcome.answers,
            stats: outcome.stats,
        })
    })
    .await
    .map_err(|e| ApiError(Error::Internal(e.to_string())))?;
    result.map(Json).map_err(ApiError)
}

#[derive(Debug, Deserialize)]
struct AutocompleteParams {
    #[serde(default)]
    q: String,
    limit: Option<usize>,
}

async fn autocomplete(
    State(graph): State<SharedGraph>,
    Query(params): Query<AutocompleteParams>,
) -> Result<Json<Vec<Suggestion>>, ApiError> {
    let limit = params.limit.unwrap_or(10);
    if limit == 0 {
        return Err(ApiError(Error::InvalidParameter("limit must be at least 1".into())));
    }
    let found = graph
        .autocomplete(&params.q, limit)
        .into_iter()
        .map(|(id, name)| Suggestion {
            id: id.0,
            name: name.to_string(),
        })
        .collect();
    Ok(Json(found))
}

async fn health(State(graph): State<SharedGraph>) -> Json<serde_json::Value> {
    Json(serde_json::json!({
        "status": "ok",
        "entities": graph.entity_count(),
        "edges": graph.edge_count(),
    }))
}
