use carshare_core::cost::CostError;
use carshare_core::fleet::{FleetError, ImportError};
use carshare_core::geo::GeoError;
use carshare_core::rank::RankError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    Validation(String),
    #[error("email is not a valid address")]
    InvalidEmail,
    #[error("password must be at least {min} characters")]
    WeakPassword { min: usize },
    #[error("an account with this email already exists")]
    DuplicateEmail,
    #[error("confirmation token is unknown, used or expired")]
    InvalidToken,
    #[error("invalid credentials")]
    AuthenticationFailed,
    #[error("a valid session token is required")]
    Unauthenticated,
    #[error("admin token missing or invalid")]
    Forbidden,
    #[error("{0} not found")]
    NotFound(String),
    #[error("vehicle {0} is not available for booking")]
    Inactive(String),
    #[error("interval start must be before its end")]
    InvalidInterval,
    #[error("vehicle is already booked for an overlapping interval")]
    Conflict,
    #[error("store is not empty; pass force to overwrite it")]
    RestoreRefused,
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Import(#[from] ImportError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("storage error: {0}")]
    Storage(#[from] rusqlite::Error),
    #[error("password hashing failed: {0}")]
    Hash(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    /// Stable machine-readable code used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Validation(_) | ServiceError::Geo(_) | ServiceError::Cost(_) | ServiceError::Fleet(_) => {
                "invalid_request"
            }
            ServiceError::InvalidEmail => "invalid_email",
            ServiceError::WeakPassword { .. } => "weak_password",
            ServiceError::DuplicateEmail => "email_taken",
            ServiceError::InvalidToken => "invalid_token",
            ServiceError::AuthenticationFailed => "authentication_failed",
            ServiceError::Unauthenticated => "unauthenticated",
            ServiceError::Forbidden => "forbidden",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Inactive(_) => "vehicle_inactive",
            ServiceError::InvalidInterval => "invalid_interval",
            ServiceError::Conflict => "booking_conflict",
            ServiceError::RestoreRefused => "restore_refused",
            ServiceError::Snapshot(_) => "invalid_snapshot",
            ServiceError::Rank(RankError::EmptyFleet) => "empty_fleet",
            ServiceError::Rank(_) => "invalid_preferences",
            ServiceError::Import(ImportError::Malformed(_)) => "malformed_document",
            ServiceError::Import(ImportError::Schema(_)) => "schema_violation",
            ServiceError::Storage(_) | ServiceError::Hash(_) | ServiceError::Config(_) | ServiceError::Io(_) => {
                "internal"
            }
        }
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
