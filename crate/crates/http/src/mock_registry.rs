use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;

use edw_core::domain::OrgNumber;
use edw_core::registry::{RegistryError, RegistrySource};

use crate::error::ApiError;

type Source = Arc<dyn RegistrySource>;

/// `GET /company/{org}` and `GET /company/{org}/financials` over any registry
/// source, normally a fixture file.
pub fn registry_router(source: Source) -> Router {
    Router::new()
        .route("/company/{org}", get(company))
        .route("/company/{org}/financials", get(financials))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such resource") })
        .with_state(source)
}

fn registry_error(e: RegistryError) -> ApiError {
    let status = match &e {
        RegistryError::Malformed(_) => StatusCode::BAD_REQUEST,
        RegistryError::NotFound(_) => StatusCode::NOT_FOUND,
        RegistryError::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
        RegistryError::InvalidResponse(_) => StatusCode::BAD_GATEWAY,
    };
    let code = match &e {
        RegistryError::Malformed(_) => "MALFORMED_ORG_NUMBER",
        RegistryError::NotFound(_) => "NOT_FOUND",
        RegistryError::Unavailable(_) => "REGISTRY_UNAVAILABLE",
        RegistryError::InvalidResponse(_) => "INVALID_RESPONSE",
    };
    ApiError::new(status, code, e.to_string())
}

async fn lookup<T, F>(source: Source, raw: String, f: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce(&dyn RegistrySource, &OrgNumber) -> Result<T, RegistryError> + Send + 'static,
{
    let result = tokio::task::spawn_blocking(move || {
        let org = source.parse_org_number(&raw)?;
        f(source.as_ref(), &org)
    })
    .await;
    match result {
        Ok(Ok(value)) => Json(value).into_response(),
        Ok(Err(e)) => registry_error(e).into_response(),
        Err(e) => ApiError::internal(e.to_string()).into_response(),
    }
}

async fn company(State(source): State<Source>, Path(org): Path<String>) -> Response {
    lookup(source, org, |s, org| s.fetch_company(org)).await
}

async fn financials(State(source): State<Source>, Path(org): Path<String>) -> Response {
    lookup(source, org, |s, org| s.fetch_financials(org)).await
}
