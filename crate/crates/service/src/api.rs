use std::collections::HashMap;
use std::net::SocketAddr;

use axum::extract::rejection::ExtensionRejection;
use axum::extract::{ConnectInfo, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dbits_core::{aggregate_leaderboard, rolling_rank_history, EvalError, Metric, RecordFilter, RefreshOutcome};
use serde_json::json;

use crate::snapshot::ServedRun;
use crate::AppState;

const DEFAULT_LIMIT: usize = 1000;
const MAX_LIMIT: usize = 10_000;

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

/// Query parameters, parsed by hand so malformed values get a JSON 400.
struct Params(HashMap<String, String>);

impl Params {
    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ApiError> {
        self.str(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| ApiError::bad_request(format!("invalid value for `{key}`: {v}")))
            })
            .transpose()
    }
}

fn served_run<'a>(snapshot: &'a crate::Snapshot, params: &Params) -> Result<&'a ServedRun, ApiError> {
    match params.str("vintage") {
        Some(v) => snapshot
            .run(Some(v))
            .ok_or_else(|| ApiError::not_found(format!("no committed run for vintage {v}"))),
        None => snapshot
            .run(None)
            .ok_or_else(|| ApiError::not_found("no committed runs yet")),
    }
}

/// Metric and horizon selection, validated against the run's config.
fn selection(run: &ServedRun, params: &Params) -> Result<(Metric, usize), ApiError> {
    let cfg = &run.manifest.config;
    let metric = params.parse::<Metric>("metric")?.unwrap_or(cfg.primary_metric);
    if !cfg.metrics.contains(&metric) {
        return Err(ApiError::bad_request(format!("metric {metric} is not configured")));
    }
    let horizon = params.parse::<usize>("horizon")?.unwrap_or(cfg.horizons[0]);
    if !cfg.horizons.contains(&horizon) {
        return Err(ApiError::bad_request(format!(
            "horizon {horizon} is not one of the configured horizons {:?}",
            cfg.horizons
        )));
    }
    Ok((metric, horizon))
}

fn eval_error(e: EvalError) -> ApiError {
    match e {
        EvalError::EmptyGroup => ApiError::not_found("no records for this selection"),
        EvalError::TooFewOrigins { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    }
}

async fn health(State(state): State<AppState>) -> Response {
    let snapshot = state.snapshot();
    Json(json!({ "status": "ok", "latest_vintage": snapshot.latest_vintage() })).into_response()
}

async fn vintages(State(state): State<AppState>) -> Response {
    Json(&state.snapshot().vintages).into_response()
}

async fn models(State(state): State<AppState>) -> Response {
    Json(&state.snapshot().models).into_response()
}

async fn leaderboard(State(state): State<AppState>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let params = Params(q);
    let snapshot = state.snapshot();
    let run = served_run(&snapshot, &params)?;
    let (metric, horizon) = selection(run, &params)?;
    let rows = aggregate_leaderboard(&run.records, metric, horizon, &run.manifest.vintage_id).map_err(eval_error)?;
    Ok(Json(rows).into_response())
}

async fn history(State(state): State<AppState>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let params = Params(q);
    let snapshot = state.snapshot();
    let run = served_run(&snapshot, &params)?;
    let (metric, horizon) = selection(run, &params)?;
    let window = params
        .parse::<usize>("window")?
        .unwrap_or(state.config().settings.history_window);
    let model = params.str("model");
    if let Some(m) = model {
        if !run.records.iter().any(|r| r.model_id == m) {
            return Err(ApiError::not_found(format!("unknown model {m}")));
        }
    }
    let mut points = rolling_rank_history(&run.records, metric, horizon, window).map_err(eval_error)?;
    if let Some(m) = model {
        points.retain(|p| p.model_id == m);
    }
    Ok(Json(points).into_response())
}

async fn records(State(state): State<AppState>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let params = Params(q);
    let filter = RecordFilter {
        vintage: params.str("vintage").map(String::from),
        model: params.str("model").map(String::from),
        series: params.str("series").map(String::from),
        horizon: params.parse("horizon")?,
        metric: params.parse("metric")?,
    };
    let limit = params.parse::<usize>("limit")?.unwrap_or(DEFAULT_LIMIT);
    if limit == 0 || limit > MAX_LIMIT {
        return Err(ApiError::bad_request(format!("limit must be in 1..={MAX_LIMIT}")));
    }
    let offset = params.parse::<usize>("offset")?.unwrap_or(0);
    let snapshot = state.snapshot();
    let matching: Vec<_> = snapshot
        .runs
        .values()
        .flat_map(|run| run.records.iter())
        .filter(|r| filter.matches(r))
        .collect();
    let page: Vec<_> = matching.iter().skip(offset).take(limit).collect();
    Ok(Json(json!({
        "total": matching.len(),
        "offset": offset,
        "limit": limit,
        "records": page,
    }))
    .into_response())
}

async fn refresh(
    State(state): State<AppState>,
    peer: Result<ConnectInfo<SocketAddr>, ExtensionRejection>,
) -> ApiResult {
    let local = peer.is_ok_and(|ConnectInfo(p)| p.ip().is_loopback());
    if !local && !state.config().allow_remote_refresh {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            "refresh is only accepted from localhost",
        ));
    }
    let body = match state.refresh().await {
        RefreshOutcome::Refreshed { run, incidents } => json!({
            "outcome": "refreshed",
            "run_id": run.run_id,
            "vintage_id": run.vintage_id,
            "record_count": run.record_count,
            "incidents": incidents.iter().map(|i| json!({
                "model_id": i.model_id,
                "series_id": i.series_id,
                "message": i.message,
            })).collect::<Vec<_>>(),
        }),
        RefreshOutcome::NoChange => json!({ "outcome": "no_change" }),
        RefreshOutcome::Failed(message) => {
            return Err(ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("refresh failed: {message}"),
            ))
        }
    };
    Ok(Json(body).into_response())
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/vintages", get(vintages))
        .route("/api/models", get(models))
        .route("/api/leaderboard", get(leaderboard))
        .route("/api/history", get(history))
        .route("/api/records", get(records))
        .route("/api/refresh", post(refresh));
    let app = match &state.config().static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    };
    app.with_state(state)
}
