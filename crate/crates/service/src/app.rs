//! Service operations shared by the HTTP layer and the command-line tool.

use std::path::Path;

use argon2::password_hash::rand_core::{OsRng, RngCore};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine as _;
use carshare_core::cost::{quote_trip, Cents, TripPlan};
use carshare_core::fleet::{within_radius, ImportReport, RatingRecord, RatingSummary, UserId, VehicleId};
use carshare_core::geo::GeoPoint;
use carshare_core::rank::{rank_vehicles, Candidate, PreferenceProfile, RankMode, RankedList};
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Result, ServiceError};
use crate::password::{check_password_policy, PasswordHasher};
use crate::store::{Account, Booking, NewAccount, Store};

pub const TOKEN_BYTES: usize = 32;
pub const CONFIRMATION_SUBJECT: &str = "Confirm your carsharing account";
const TOKEN_LINE_PREFIX: &str = "Confirmation token: ";

/// 256 random bits from the operating system, URL-safe base64 without padding.
pub fn generate_token() -> String {
    let mut bytes = [0u8; TOKEN_BYTES];
    OsRng.fill_bytes(&mut bytes);
    URL_SAFE_NO_PAD.encode(bytes)
}

/// Hex SHA-256 digest under which tokens are stored.
pub fn token_digest(token: &str) -> String {
    Sha256::digest(token.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Extracts the confirmation token from an outbox message body.
pub fn confirmation_token(body: &str) -> Option<&str> {
    body.lines().find_map(|l| l.strip_prefix(TOKEN_LINE_PREFIX)).map(str::trim)
}

/// Lowercases and checks the address shape `local@domain.tld`.
pub fn normalize_email(email: &str) -> Result<String> {
    let email = email.trim().to_lowercase();
    let valid = email.len() <= 254
        && !email.chars().any(|c| c.is_whitespace() || c.is_control())
        && match email.split_once('@') {
            Some((local, domain)) => {
                !local.is_empty()
                    && !domain.contains('@')
                    && domain.split('.').count() >= 2
                    && domain.split('.').all(|label| !label.is_empty())
            }
            None => false,
        };
    if valid {
        Ok(email)
    } else {
        Err(ServiceError::InvalidEmail)
    }
}

#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    pub token: String,
    #[serde(skip)]
    pub user_id: UserId,
    pub expires_at: DateTime<Utc>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("token", &"<redacted>")
            .field("user_id", &self.user_id)
            .field("expires_at", &self.expires_at)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parking {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingAverages {
    pub count: u64,
    pub comfort: f64,
    pub consumption: f64,
    pub safety: f64,
    pub overall: f64,
}

impl From<RatingSummary> for RatingAverages {
    fn from(s: RatingSummary) -> Self {
        RatingAverages {
            count: s.count,
            comfort: s.mean_comfort,
            consumption: s.mean_consumption,
            safety: s.mean_safety,
            overall: s.overall,
        }
    }
}

/// One vehicle as shown in the area listing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleListing {
    pub id: VehicleId,
    pub partner_id: String,
    pub brand: String,
    pub model: String,
    pub color: String,
    pub air_conditioning: bool,
    pub price_per_hour_cents: Cents,
    pub fuel_type: String,
    pub odometer_km: u64,
    pub parking: Parking,
    pub distance_km: f64,
    pub ratings: RatingAverages,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaQuery {
    pub lat: f64,
    pub lon: f64,
    pub radius_km: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankRequest {
    #[serde(default)]
    pub criteria: Option<Vec<String>>,
    #[serde(default)]
    pub judgments: Option<Vec<f64>>,
    pub lat: f64,
    pub lon: f64,
    pub radius_km: f64,
    #[serde(default = "default_mode")]
    pub mode: RankMode,
}

fn default_mode() -> RankMode {
    RankMode::Fast
}

impl RankRequest {
    pub fn profile(&self) -> Result<PreferenceProfile> {
        Ok(match (&self.criteria, &self.judgments) {
            (None, None) => PreferenceProfile::default_profile(),
            (criteria, judgments) => PreferenceProfile::new(
                criteria.clone().unwrap_or_else(|| PreferenceProfile::default_profile().criteria().to_vec()),
                judgments.clone().unwrap_or_default(),
            )?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingScores {
    pub comfort: u8,
    pub consumption: u8,
    pub safety: u8,
}

#[derive(Debug)]
pub struct Service {
    store: Store,
    hasher: PasswordHasher,
    session_ttl: Duration,
    confirmation_ttl: Duration,
    admin_digest: Option<String>,
}

fn ttl(secs: u64) -> Result<Duration> {
    i64::try_from(secs)
        .ok()
        .and_then(Duration::try_seconds)
        .ok_or_else(|| ServiceError::Config(format!("TTL of {secs} s is out of range")))
}

impl Service {
    pub fn new(store: Store, config: &Config) -> Result<Self> {
        config.validate()?;
        Ok(Service {
            store,
            hasher: PasswordHasher::new(config.hash)?,
            session_ttl: ttl(config.session_ttl_secs)?,
            confirmation_ttl: ttl(config.confirmation_ttl_secs)?,
            admin_digest: config.admin_token.as_deref().map(token_digest),
        })
    }

    pub fn open(config: &Config) -> Result<Self> {
        Self::new(Store::open(Path::new(&config.storage_path))?, config)
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    /// Stores an unconfirmed account and queues its confirmation token in the outbox.
    pub fn register(&self, email: &str, password: &str, now: DateTime<Utc>) -> Result<Account> {
        let email = normalize_email(email)?;
        check_password_policy(password)?;
        let password_hash = self.hasher.hash(password)?;
        let token = generate_token();
        let account = self.store.register_account(NewAccount {
            id: &UserId(uuid::Uuid::new_v4().to_string()),
            email: &email,
            password_hash: &password_hash,
            token_hash: &token_digest(&token),
            token_expires_at: now + self.confirmation_ttl,
            subject: CONFIRMATION_SUBJECT,
            body: &format!(
                "Welcome! Confirm your account within {} hours.\n{TOKEN_LINE_PREFIX}{token}\n",
                self.confirmation_ttl.num_hours()
            ),
            now,
        })?;
        tracing::info!(user = %account.id, "account registered");
        Ok(account)
    }

    pub fn confirm(&self, token: &str, now: DateTime<Utc>) -> Result<Account> {
        let account = self.store.confirm_account(&token_digest(token), now)?;
        tracing::info!(user = %account.id, "account confirmed");
        Ok(account)
    }

    /// Unknown email, wrong password and unconfirmed account all fail the same way.
    pub fn login(&self, email: &str, password: &str, now: DateTime<Utc>) -> Result<Session> {
        let stored = match normalize_email(email) {
            Ok(email) => self.store.credentials(&email)?,
            Err(_) => None,
        };
        let account = match stored {
            Some((account, hash)) => {
                let verified = self.hasher.verify(password, &hash);
                Some(account).filter(|a| verified && a.confirmed)
            }
            None => {
                self.hasher.verify_dummy(password);
                None
            }
        };
        let Some(account) = account else {
            tracing::info!("login rejected");
            return Err(ServiceError::AuthenticationFailed);
        };
        let token = generate_token();
        let expires_at = now + self.session_ttl;
        self.store.create_session(&token_digest(&token), &account.id, expires_at)?;
        tracing::info!(user = %account.id, "session opened");
        Ok(Session {
            token,
            user_id: account.id,
            expires_at,
        })
    }

    pub fn authenticate(&self, token: Option<&str>, now: DateTime<Utc>) -> Result<UserId> {
        let token = token.ok_or(ServiceError::Unauthenticated)?;
        self.store
            .session_user(&token_digest(token), now)?
            .ok_or(ServiceError::Unauthenticated)
    }

    /// Active vehicles within the radius, nearest first, with rating summaries.
    pub fn list_vehicles(&self, area: &AreaQuery) -> Result<Vec<VehicleListing>> {
        let center = GeoPoint::new(area.lat, area.lon)?;
        let vehicles = self.store.active_vehicles()?;
        let summaries = self.store.rating_summaries()?;
        let nearby = within_radius(vehicles.iter(), center, area.radius_km)?;
        Ok(nearby
            .into_iter()
            .map(|n| {
                let v = n.vehicle;
                let summary = summaries.get(&v.id).copied().unwrap_or_else(RatingSummary::unrated);
                VehicleListing {
                    partner_id: v.partner_id.0,
                    brand: v.brand,
                    model: v.model,
                    color: v.color,
                    air_conditioning: v.air_conditioning,
                    price_per_hour_cents: v.price_per_hour,
                    fuel_type: v.fuel_type.as_str().into(),
                    odometer_km: v.odometer_km,
                    parking: Parking {
                        name: v.location.parking_name,
                        latitude: v.location.latitude,
                        longitude: v.location.longitude,
                    },
                    distance_km: n.distance_km,
                    ratings: summary.into(),
                    id: v.id,
                }
            })
            .collect())
    }

    /// Ranks the active vehicles inside the requested area.
    pub fn rank(&self, request: &RankRequest) -> Result<RankedList> {
        let profile = request.profile()?;
        let center = GeoPoint::new(request.lat, request.lon)?;
        let vehicles = self.store.active_vehicles()?;
        let summaries = self.store.rating_summaries()?;
        let candidates: Vec<Candidate> = within_radius(vehicles.iter(), center, request.radius_km)?
            .into_iter()
            .map(|n| {
                let summary = summaries.get(&n.vehicle.id).copied().unwrap_or_else(RatingSummary::unrated);
                Candidate::new(n.vehicle.id, summary)
            })
            .collect();
        Ok(rank_vehicles(&candidates, &profile, request.mode)?)
    }

    /// Trip quote under the tariff of the vehicle's partner.
    pub fn simulate(&self, vehicle_id: &VehicleId, plan: &TripPlan) -> Result<Cents> {
        let vehicle = self
            .store
            .vehicle(vehicle_id)?
            .ok_or_else(|| ServiceError::NotFound(format!("vehicle {vehicle_id}")))?;
        let partner = self
            .store
            .partner(&vehicle.partner_id)?
            .ok_or_else(|| ServiceError::NotFound(format!("partner {}", vehicle.partner_id)))?;
        Ok(quote_trip(&partner.tariff, plan)?)
    }

    pub fn create_booking(
        &self,
        user: &UserId,
        vehicle_id: &VehicleId,
        start: DateTime<Utc>,
        end: DateTime<Utc>,
        plan: &TripPlan,
        now: DateTime<Utc>,
    ) -> Result<Booking> {
        let booking = self.store.create_booking(user, vehicle_id, start, end, plan, now)?;
        tracing::info!(user = %user, vehicle = %vehicle_id, booking = booking.id, "booking confirmed");
        Ok(booking)
    }

    pub fn rate(
        &self,
        user: &UserId,
        vehicle_id: &VehicleId,
        scores: RatingScores,
        now: DateTime<Utc>,
    ) -> Result<RatingSummary> {
        self.store.record_rating(&RatingRecord {
            vehicle_id: vehicle_id.clone(),
            user_id: user.clone(),
            comfort: scores.comfort,
            consumption: scores.consumption,
            safety: scores.safety,
            timestamp: now,
        })
    }

    /// Imports an evaluation document when `admin_token` matches the configured token.
    pub fn import(&self, admin_token: Option<&str>, xml: &[u8], now: DateTime<Utc>) -> Result<ImportReport> {
        match (&self.admin_digest, admin_token) {
            (Some(expected), Some(given)) if *expected == token_digest(given) => {}
            _ => return Err(ServiceError::Forbidden),
        }
        let report = self.store.import_external(xml, now)?;
        tracing::info!(accepted = report.accepted, rejected = report.rejected.len(), "evaluations imported");
        Ok(report)
    }
}
