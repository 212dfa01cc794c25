//! JSON over HTTP, mounted under `/api/v1`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use carshare_core::cost::TripPlan;
use carshare_core::fleet::VehicleId;
use carshare_core::rank::RankError;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::app::{AreaQuery, RankRequest, RatingAverages, RatingScores, Service};
use crate::error::{Result, ServiceError};

pub const API_PREFIX: &str = "/api/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error_code: String,
    pub message: String,
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::DuplicateEmail
            | ServiceError::Conflict
            | ServiceError::Inactive(_)
            | ServiceError::RestoreRefused => StatusCode::CONFLICT,
            ServiceError::AuthenticationFailed | ServiceError::Unauthenticated => StatusCode::UNAUTHORIZED,
            ServiceError::Forbidden => StatusCode::FORBIDDEN,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Rank(RankError::EmptyFleet) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Storage(_) | ServiceError::Hash(_) | ServiceError::Config(_) | ServiceError::Io(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::BAD_REQUEST,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        let message = if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %self, "request failed");
            "internal error".to_string()
        } else {
            self.to_string()
        };
        let body = ErrorBody {
            error_code: self.code().into(),
            message,
        };
        (status, Json(body)).into_response()
    }
}

fn json_body<T>(body: std::result::Result<Json<T>, JsonRejection>) -> Result<T> {
    body.map(|Json(v)| v).map_err(|e| ServiceError::Validation(e.body_text()))
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

async fn blocking<T, F>(service: Arc<Service>, f: F) -> Result<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .map_err(|e| ServiceError::Validation(format!("worker failed: {e}")))?
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Credentials {
    email: String,
    password: String,
}

impl std::fmt::Debug for Credentials {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Credentials")
            .field("email", &self.email)
            .field("password", &"<redacted>")
            .finish()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfirmRequest {
    token: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateRequest {
    vehicle_id: VehicleId,
    travel_minutes: u32,
    standby_minutes: u32,
    distance_km: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BookingRequest {
    vehicle_id: VehicleId,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    trip_plan: TripPlan,
}

#[derive(Serialize)]
struct AccountResponse {
    id: String,
    email: String,
    confirmed: bool,
}

#[derive(Serialize)]
struct CostResponse {
    cost_cents: i64,
}

#[derive(Serialize)]
struct RatingResponse {
    vehicle_id: VehicleId,
    ratings: RatingAverages,
}

async fn register(
    State(service): State<Arc<Service>>,
    body: std::result::Result<Json<Credentials>, JsonRejection>,
) -> Result<impl IntoResponse> {
    let c = json_body(body)?;
    let account = blocking(service, move |s| s.register(&c.email, &c.password, Utc::now())).await?;
    Ok((
        StatusCode::CREATED,
        Json(AccountResponse {
            id: account.id.0,
            email: account.email,
            confirmed: account.confirmed,
        }),
    ))
}

async fn confirm(
    State(service): State<Arc<Service>>,
    body: std::result::Result<Json<ConfirmRequest>, JsonRejection>,
) -> Result<impl IntoResponse> {
    let req = json_body(body)?;
    let account = blocking(service, move |s| s.confirm(&req.token, Utc::now())).await?;
    Ok(Json(AccountResponse {
        id: account.id.0,
        email: account.email,
        confirmed: account.confirmed,
    }))
}

async fn login(
    State(service): State<Arc<Service>>,
    body: std::result::Result<Json<Credentials>, JsonRejection>,
) -> Result<impl IntoResponse> {
    let c = json_body(body)?;
    let session = blocking(service, move |s| s.login(&c.email, &c.password, Utc::now())).await?;
    Ok(Json(session))
}

async fn list_vehicles(
    State(service): State<Arc<Service>>,
    query: std::result::Result<Query<AreaQuery>, QueryRejection>,
) -> Result<impl IntoResponse> {
    let Query(area) = query.map_err(|e| ServiceError::Validation(e.body_text()))?;
    Ok(Json(blocking(service, move |s| s.list_vehicles(&area)).await?))
}

async fn rank(
    State(service): State<Arc<Service>>,
    body: std::result::Result<Json<RankRequest>, JsonRejection>,
) -> Result<impl IntoResponse> {
    let req = json_body(body)?;
    Ok(Json(blocking(service, move |s| s.rank(&req)).await?))
}

async fn simulate(
    State(service): State<Arc<Service>>,
    body: std::result::Result<Json<SimulateRequest>, JsonRejection>,
) -> Result<impl IntoResponse> {
    let req = json_body(body)?;
    let plan = TripPlan {
        travel_minutes: req.travel_minutes,
        standby_minutes: req.standby_minutes,
        distance_km: req.distance_km,
    };
    let cost = blocking(service, move |s| s.simulate(&req.vehicle_id, &plan)).await?;
    Ok(Json(CostResponse { cost_cents: cost.0 }))
}

async fn create_booking(
    State(service): State<Arc<Service>>,
    headers: HeaderMap,
    body: std::result::Result<Json<BookingRequest>, JsonRejection>,
) -> Result<impl IntoResponse> {
    let token = bearer(&headers).map(str::to_string);
    let req = json_body(body)?;
    let booking = blocking(service, move |s| {
        let now = Utc::now();
        let user = s.authenticate(token.as_deref(), now)?;
        s.create_booking(&user, &req.vehicle_id, req.start, req.end, &req.trip_plan, now)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(booking)))
}

async fn rate(
    State(service): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: std::result::Result<Json<RatingScores>, JsonRejection>,
) -> Result<impl IntoResponse> {
    let token = bearer(&headers).map(str::to_string);
    let scores = json_body(body)?;
    let vehicle_id = VehicleId(id);
    let response = blocking(service, move |s| {
        let now = Utc::now();
        let user = s.authenticate(token.as_deref(), now)?;
        let summary = s.rate(&user, &vehicle_id, scores, now)?;
        Ok(RatingResponse {
            vehicle_id,
            ratings: summary.into(),
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(response)))
}

async fn import(State(service): State<Arc<Service>>, headers: HeaderMap, body: Bytes) -> Result<impl IntoResponse> {
    let token = bearer(&headers).map(str::to_string);
    let report = blocking(service, move |s| s.import(token.as_deref(), &body, Utc::now())).await?;
    Ok(Json(report))
}

async fn not_found() -> ServiceError {
    ServiceError::NotFound("route".into())
}

async fn method_not_allowed() -> Response {
    let body = ErrorBody {
        error_code: "method_not_allowed".into(),
        message: "method not allowed for this route".into(),
    };
    (StatusCode::METHOD_NOT_ALLOWED, Json(body)).into_response()
}

pub fn router(service: Arc<Service>) -> Router {
    let api = Router::new()
        .route("/auth/register", post(register))
        .route("/auth/confirm", post(confirm))
        .route("/auth/login", post(login))
        .route("/vehicles", axum::routing::get(list_vehicles))
        .route("/rank", post(rank))
        .route("/simulate", post(simulate))
        .route("/bookings", post(create_booking))
        .route("/vehicles/{id}/ratings", post(rate))
        .route("/admin/import", post(import))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed);
    Router::new()
        .nest(API_PREFIX, api)
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(service)
}

/// Binds `addr` and serves in a background task. Returns the bound address.
pub async fn spawn(service: Arc<Service>, addr: SocketAddr) -> Result<(SocketAddr, tokio::task::JoinHandle<()>)> {
    let listener = TcpListener::bind(addr).await?;
    let bound = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, router(service)).await {
            tracing::error!(error = %e, "server stopped");
        }
    });
    Ok((bound, handle))
}

/// Serves until Ctrl-C.
pub async fn serve(service: Arc<Service>, addr: SocketAddr) -> Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
