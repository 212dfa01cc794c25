//! SQLite persistence. Every mutation runs inside one transaction, and
//! bookings use `BEGIN IMMEDIATE` so the overlap check and the insert hold the
//! write lock together.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Mutex, MutexGuard};
use std::time::Duration;

use carshare_core::cost::{quote_trip, Cents, Tariff, TripPlan};
use carshare_core::fleet::import::parse_document;
use carshare_core::fleet::{
    ImportReport, Location, Partner, PartnerId, RatingRecord, RatingSummary, RejectedRecord, UserId, Vehicle,
    VehicleId,
};
use chrono::{DateTime, Utc};
use rusqlite::types::Type;
use rusqlite::{params, Connection, OptionalExtension, Row, Transaction, TransactionBehavior};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

/// Tables in foreign-key dependency order.
pub const TABLES: [&str; 8] = [
    "partners",
    "clients",
    "vehicles",
    "ratings",
    "bookings",
    "sessions",
    "confirmation_tokens",
    "outbox",
];

pub const SCHEMA: &str = include_str!("schema.sql");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Account {
    pub id: UserId,
    pub email: String,
    pub confirmed: bool,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BookingStatus {
    Confirmed,
    Cancelled,
}

impl BookingStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            BookingStatus::Confirmed => "confirmed",
            BookingStatus::Cancelled => "cancelled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Booking {
    pub id: i64,
    pub user_id: UserId,
    pub vehicle_id: VehicleId,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub trip_plan: TripPlan,
    pub quote_cents: Cents,
    pub status: BookingStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutboxMessage {
    pub id: i64,
    pub recipient: String,
    pub subject: String,
    pub body: String,
    pub created_at: DateTime<Utc>,
}

/// Rows written together when an account is registered.
pub struct NewAccount<'a> {
    pub id: &'a UserId,
    pub email: &'a str,
    pub password_hash: &'a str,
    pub token_hash: &'a str,
    pub token_expires_at: DateTime<Utc>,
    pub subject: &'a str,
    pub body: &'a str,
    pub now: DateTime<Utc>,
}

pub(crate) fn micros(t: DateTime<Utc>) -> i64 {
    t.timestamp_micros()
}

fn instant(row: &Row<'_>, idx: usize) -> rusqlite::Result<DateTime<Utc>> {
    let v: i64 = row.get(idx)?;
    DateTime::from_timestamp_micros(v).ok_or(rusqlite::Error::IntegralValueOutOfRange(idx, v))
}

fn cents(row: &Row<'_>, idx: usize) -> rusqlite::Result<Cents> {
    row.get(idx).map(Cents)
}

fn conversion<E: std::error::Error + Send + Sync + 'static>(idx: usize, e: E) -> rusqlite::Error {
    rusqlite::Error::FromSqlConversionFailure(idx, Type::Text, Box::new(e))
}

const VEHICLE_COLUMNS: &str = "id, partner_id, brand, model, color, air_conditioning, price_per_hour_cents, \
     fuel_type, odometer_km, latitude, longitude, parking_name, active";

fn vehicle_from_row(row: &Row<'_>) -> rusqlite::Result<Vehicle> {
    let fuel: String = row.get(7)?;
    let odometer: i64 = row.get(8)?;
    Ok(Vehicle {
        id: VehicleId(row.get(0)?),
        partner_id: PartnerId(row.get(1)?),
        brand: row.get(2)?,
        model: row.get(3)?,
        color: row.get(4)?,
        air_conditioning: row.get(5)?,
        price_per_hour: cents(row, 6)?,
        fuel_type: fuel.parse().map_err(|e| conversion(7, e))?,
        odometer_km: u64::try_from(odometer).map_err(|_| rusqlite::Error::IntegralValueOutOfRange(8, odometer))?,
        location: Location {
            latitude: row.get(9)?,
            longitude: row.get(10)?,
            parking_name: row.get(11)?,
        },
        active: row.get(12)?,
    })
}

const BOOKING_COLUMNS: &str =
    "id, client_id, vehicle_id, starts_at, ends_at, travel_minutes, standby_minutes, distance_km, quote_cents, status";

fn booking_from_row(row: &Row<'_>) -> rusqlite::Result<Booking> {
    let status: String = row.get(9)?;
    Ok(Booking {
        id: row.get(0)?,
        user_id: UserId(row.get(1)?),
        vehicle_id: VehicleId(row.get(2)?),
        start: instant(row, 3)?,
        end: instant(row, 4)?,
        trip_plan: TripPlan {
            travel_minutes: row.get(5)?,
            standby_minutes: row.get(6)?,
            distance_km: row.get(7)?,
        },
        quote_cents: cents(row, 8)?,
        status: match status.as_str() {
            "confirmed" => BookingStatus::Confirmed,
            _ => BookingStatus::Cancelled,
        },
    })
}

fn account_from_row(row: &Row<'_>) -> rusqlite::Result<Account> {
    Ok(Account {
        id: UserId(row.get(0)?),
        email: row.get(1)?,
        confirmed: row.get(2)?,
        created_at: instant(row, 3)?,
    })
}

fn summary_from_row(row: &Row<'_>, first: usize) -> rusqlite::Result<RatingSummary> {
    let get = |i: usize| -> rusqlite::Result<u64> {
        let v: i64 = row.get(first + i)?;
        u64::try_from(v).map_err(|_| rusqlite::Error::IntegralValueOutOfRange(first + i, v))
    };
    Ok(RatingSummary::from_totals(get(0)?, get(1)?, get(2)?, get(3)?))
}

pub struct Store {
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").finish_non_exhaustive()
    }
}

impl Store {
    /// Opens (creating if needed) a file-backed store. The parent directory must exist.
    pub fn open(path: &Path) -> Result<Self> {
        let conn = Connection::open_with_flags(
            path,
            rusqlite::OpenFlags::SQLITE_OPEN_READ_WRITE
                | rusqlite::OpenFlags::SQLITE_OPEN_CREATE
                | rusqlite::OpenFlags::SQLITE_OPEN_NO_MUTEX,
        )?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        Self::init(conn)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.busy_timeout(Duration::from_secs(5))?;
        conn.pragma_update(None, "foreign_keys", true)?;
        conn.execute_batch(SCHEMA)?;
        Ok(Store { conn: Mutex::new(conn) })
    }

    pub(crate) fn lock(&self) -> MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    fn write<T>(&self, f: impl FnOnce(&Transaction<'_>) -> Result<T>) -> Result<T> {
        let mut conn = self.lock();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let out = f(&tx)?;
        tx.commit()?;
        Ok(out)
    }

    // Partners and vehicles

    pub fn upsert_partner(&self, partner: &Partner) -> Result<()> {
        partner.tariff.validate()?;
        self.write(|tx| upsert_partner(tx, partner))
    }

    pub fn partner(&self, id: &PartnerId) -> Result<Option<Partner>> {
        let conn = self.lock();
        let partner = conn
            .query_row(
                "SELECT id, name, rate_travel_cents, rate_standby_cents, rate_distance_cents, included_km \
                 FROM partners WHERE id = ?1",
                [id.as_str()],
                |row| {
                    Ok(Partner {
                        id: PartnerId(row.get(0)?),
                        name: row.get(1)?,
                        tariff: Tariff {
                            rate_travel: cents(row, 2)?,
                            rate_standby: cents(row, 3)?,
                            rate_distance: cents(row, 4)?,
                            included_km: row.get(5)?,
                        },
                    })
                },
            )
            .optional()?;
        Ok(partner)
    }

    pub fn upsert_vehicle(&self, vehicle: &Vehicle) -> Result<()> {
        vehicle.validate()?;
        self.write(|tx| upsert_vehicle(tx, vehicle))
    }

    pub fn vehicle(&self, id: &VehicleId) -> Result<Option<Vehicle>> {
        let conn = self.lock();
        let sql = format!("SELECT {VEHICLE_COLUMNS} FROM vehicles WHERE id = ?1");
        Ok(conn.query_row(&sql, [id.as_str()], vehicle_from_row).optional()?)
    }

    /// Active vehicles ordered by id.
    pub fn active_vehicles(&self) -> Result<Vec<Vehicle>> {
        let conn = self.lock();
        let mut stmt = conn.prepare(&format!("SELECT {VEHICLE_COLUMNS} FROM vehicles WHERE active = 1 ORDER BY id"))?;
        let rows = stmt.query_map([], vehicle_from_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    pub fn vehicle_count(&self) -> Result<u64> {
        let conn = self.lock();
        Ok(conn.query_row("SELECT COUNT(*) FROM vehicles", [], |r| r.get::<_, i64>(0))? as u64)
    }

    /// Replaces every vehicle (and its ratings and bookings) of `partner` with the given set.
    pub fn replace_partner_fleet(&self, partner: &Partner, vehicles: &[Vehicle], ratings: &[RatingRecord]) -> Result<()> {
        partner.tariff.validate()?;
        for v in vehicles {
            v.validate()?;
        }
        for r in ratings {
            r.validate()?;
        }
        self.write(|tx| {
            let pid = partner.id.as_str();
            tx.execute(
                "DELETE FROM ratings WHERE vehicle_id IN (SELECT id FROM vehicles WHERE partner_id = ?1)",
                [pid],
            )?;
            tx.execute(
                "DELETE FROM bookings WHERE vehicle_id IN (SELECT id FROM vehicles WHERE partner_id = ?1)",
                [pid],
            )?;
            tx.execute("DELETE FROM vehicles WHERE partner_id = ?1", [pid])?;
            upsert_partner(tx, partner)?;
            for v in vehicles {
                upsert_vehicle(tx, v)?;
            }
            let mut insert = tx.prepare_cached(INSERT_RATING)?;
            for r in ratings {
                insert_rating(&mut insert, r, None)?;
            }
            Ok(())
        })
    }

    // Ratings

    pub fn record_rating(&self, rating: &RatingRecord) -> Result<RatingSummary> {
        rating.validate()?;
        self.write(|tx| {
            require_vehicle(tx, &rating.vehicle_id)?;
            insert_rating(&mut tx.prepare_cached(INSERT_RATING)?, rating, None)?;
            Ok(summary(tx, &rating.vehicle_id)?)
        })
    }

    pub fn rating_summary(&self, id: &VehicleId) -> Result<RatingSummary> {
        let conn = self.lock();
        Ok(summary(&conn, id)?)
    }

    /// Summaries of every rated vehicle. Vehicles absent from the map are unrated.
    pub fn rating_summaries(&self) -> Result<HashMap<VehicleId, RatingSummary>> {
        let conn = self.lock();
        let mut stmt = conn.prepare(
            "SELECT vehicle_id, COUNT(*), SUM(comfort), SUM(consumption), SUM(safety) FROM ratings GROUP BY vehicle_id",
        )?;
        let rows = stmt.query_map([], |row| Ok((VehicleId(row.get(0)?), summary_from_row(row, 1)?)))?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    /// Imports an external evaluation document in one transaction. Records
    /// already imported, or naming an unknown vehicle, are rejected individually.
    pub fn import_external(&self, xml: &[u8], now: DateTime<Utc>) -> Result<ImportReport> {
        let parsed = parse_document(xml, now)?;
        self.write(|tx| {
            let mut report = ImportReport {
                accepted: 0,
                rejected: parsed.rejected,
            };
            let mut insert = tx.prepare_cached(INSERT_RATING)?;
            let mut known = tx.prepare_cached("SELECT EXISTS(SELECT 1 FROM ratings WHERE external_record_id = ?1)")?;
            let mut vehicle = tx.prepare_cached("SELECT EXISTS(SELECT 1 FROM vehicles WHERE id = ?1)")?;
            for (position, evaluation) in parsed.evaluations {
                let reason = if known.query_row([&evaluation.record_id], |r| r.get::<_, bool>(0))? {
                    Some("record already imported".to_string())
                } else if !vehicle.query_row([evaluation.rating.vehicle_id.as_str()], |r| r.get::<_, bool>(0))? {
                    Some(format!("unknown vehicle {}", evaluation.rating.vehicle_id))
                } else {
                    None
                };
                match reason {
                    Some(reason) => report.rejected.push(RejectedRecord {
                        position,
                        record_id: Some(evaluation.record_id),
                        reason,
                    }),
                    None => {
                        insert_rating(&mut insert, &evaluation.rating, Some(&evaluation.record_id))?;
                        report.accepted += 1;
                    }
                }
            }
            report.rejected.sort_by_key(|r| r.position);
            Ok(report)
        })
    }

    // Accounts

    /// Inserts the unconfirmed account, its confirmation token and the outbox message atomically.
    pub fn register_account(&self, new: NewAccount<'_>) -> Result<Account> {
        self.write(|tx| {
            let taken: bool =
                tx.query_row("SELECT EXISTS(SELECT 1 FROM clients WHERE email = ?1)", [new.email], |r| r.get(0))?;
            if taken {
                return Err(ServiceError::DuplicateEmail);
            }
            let now = micros(new.now);
            tx.execute(
                "INSERT INTO clients (id, email, password_hash, confirmed, created_at) VALUES (?1, ?2, ?3, 0, ?4)",
                params![new.id.as_str(), new.email, new.password_hash, now],
            )?;
            tx.execute(
                "INSERT INTO confirmation_tokens (token_hash, client_id, expires_at, used_at) VALUES (?1, ?2, ?3, NULL)",
                params![new.token_hash, new.id.as_str(), micros(new.token_expires_at)],
            )?;
            tx.execute(
                "INSERT INTO outbox (recipient, subject, body, created_at) VALUES (?1, ?2, ?3, ?4)",
                params![new.email, new.subject, new.body, now],
            )?;
            Ok(Account {
                id: new.id.clone(),
                email: new.email.to_string(),
                confirmed: false,
                created_at: DateTime::from_timestamp_micros(now).unwrap_or(new.now),
            })
        })
    }

    /// Consumes a confirmation token and marks its account confirmed.
    pub fn confirm_account(&self, token_hash: &str, now: DateTime<Utc>) -> Result<Account> {
        self.write(|tx| {
            let token: Option<(String, i64, Option<i64>)> = tx
                .query_row(
                    "SELECT client_id, expires_at, used_at FROM confirmation_tokens WHERE token_hash = ?1",
                    [token_hash],
                    |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?)),
                )
                .optional()?;
            let now = micros(now);
            let client_id = match token {
                Some((client_id, expires_at, None)) if now < expires_at => client_id,
                _ => return Err(ServiceError::InvalidToken),
            };
            tx.execute(
                "UPDATE confirmation_tokens SET used_at = ?1 WHERE token_hash = ?2",
                params![now, token_hash],
            )?;
            tx.execute("UPDATE clients SET confirmed = 1 WHERE id = ?1", [&client_id])?;
            Ok(tx.query_row(
                "SELECT id, email, confirmed, created_at FROM clients WHERE id = ?1",
                [&client_id],
                account_from_row,
            )?)
        })
    }

    /// The account and its stored password hash.
    pub fn credentials(&self, email: &str) -> Result<Option<(Account, String)>> {
        let conn = self.lock();
        Ok(conn
            .query_row(
                "SELECT id, email, confirmed, created_at, password_hash FROM clients WHERE email = ?1",
                [email],
                |r| Ok((account_from_row(r)?, r.get(4)?)),
            )
            .optional()?)
    }

    pub fn account(&self, id: &UserId) -> Result<Option<Account>> {
        let conn = self.lock();
        Ok(conn
            .query_row(
                "SELECT id, email, confirmed, created_at FROM clients WHERE id = ?1",
                [id.as_str()],
                account_from_row,
            )
            .optional()?)
    }

    pub fn create_session(&self, token_hash: &str, user: &UserId, expires_at: DateTime<Utc>) -> Result<()> {
        self.write(|tx| {
            tx.execute(
                "INSERT INTO sessions (token_hash, client_id, expires_at) VALUES (?1, ?2, ?3)",
                params![token_hash, user.as_str(), micros(expires_at)],
            )?;
            Ok(())
        })
    }

    /// The user owning an unexpired session.
    pub fn session_user(&self, token_hash: &str, now: DateTime<Utc>) -> Result<Option<UserId>> {
        let conn = self.lock();
        Ok(conn
            .query_row(
                "SELECT client_id FROM sessions WHERE token_hash = ?1 AND expires_at > ?2",
                params![token_hash, micros(now)],
                |r| r.get(0).map(UserId),
            )
            .optional()?)
    }

    pub fn purge_expired(&self, now: DateTime<Utc>) -> Result<usize> {
        self.write(|tx| {
            let now = micros(now);
            let sessions = tx.execute("DELETE FROM sessions WHERE expires_at <= ?1", [now])?;
            let tokens = tx.execute(
                "DELETE FROM confirmation_tokens WHERE used_at IS NULL AND expires_at <= ?1",
                [now],
            )?;
            Ok(sessions + tokens)
        })
    }

    pub fn outbox(&self) -> Result<Vec<OutboxMessage>> {
        let conn = self.lock();
        let mut stmt = conn.prepare("SELECT id, recipient, subject, body, created_at FROM outbox ORDER BY id")?;
        let rows = stmt.query_map([], |r| {
            Ok(OutboxMessage {
                id: r.get(0)?,
                recipient: r.get(1)?,
                subject: r.get(2)?,
                body: r.get(3)?,
                created_at: instant(r, 4)?,
            })
        })?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }

    // Bookings

    /// Quotes and inserts a confirmed booking unless a confirmed booking for
    /// the same vehicle overlaps `[start, end)`.
    pub fn create_booking(
        &self,
        user: &UserId,
        vehicle_id: &VehicleId,
        start: DateTime<Utc>,
        end: DateTime<Utc>,
        plan: &TripPlan,
        now: DateTime<Utc>,
    ) -> Result<Booking> {
        if start >= end {
            return Err(ServiceError::InvalidInterval);
        }
        plan.validate()?;
        self.write(|tx| {
            let (active, tariff) = tx
                .query_row(
                    "SELECT v.active, p.rate_travel_cents, p.rate_standby_cents, p.rate_distance_cents, p.included_km \
                     FROM vehicles v JOIN partners p ON p.id = v.partner_id WHERE v.id = ?1",
                    [vehicle_id.as_str()],
                    |r| {
                        Ok((
                            r.get::<_, bool>(0)?,
                            Tariff {
                                rate_travel: cents(r, 1)?,
                                rate_standby: cents(r, 2)?,
                                rate_distance: cents(r, 3)?,
                                included_km: r.get(4)?,
                            },
                        ))
                    },
                )
                .optional()?
                .ok_or_else(|| ServiceError::NotFound(format!("vehicle {vehicle_id}")))?;
            if !active {
                return Err(ServiceError::Inactive(vehicle_id.to_string()));
            }
            let quote = quote_trip(&tariff, plan)?;
            let (s, e) = (micros(start), micros(end));
            let overlap: bool = tx.query_row(
                "SELECT EXISTS(SELECT 1 FROM bookings WHERE vehicle_id = ?1 AND status = 'confirmed' \
                 AND starts_at < ?3 AND ends_at > ?2)",
                params![vehicle_id.as_str(), s, e],
                |r| r.get(0),
            )?;
            if overlap {
                return Err(ServiceError::Conflict);
            }
            tx.execute(
                "INSERT INTO bookings (client_id, vehicle_id, starts_at, ends_at, travel_minutes, standby_minutes, \
                 distance_km, quote_cents, status, created_at) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, 'confirmed', ?9)",
                params![
                    user.as_str(),
                    vehicle_id.as_str(),
                    s,
                    e,
                    plan.travel_minutes,
                    plan.standby_minutes,
                    plan.distance_km,
                    quote.0,
                    micros(now)
                ],
            )?;
            let id = tx.last_insert_rowid();
            Ok(tx.query_row(
                &format!("SELECT {BOOKING_COLUMNS} FROM bookings WHERE id = ?1"),
                [id],
                booking_from_row,
            )?)
        })
    }

    /// Cancels a confirmed booking owned by `user`, freeing its interval.
    pub fn cancel_booking(&self, user: &UserId, id: i64) -> Result<Booking> {
        self.write(|tx| {
            let changed = tx.execute(
                "UPDATE bookings SET status = 'cancelled' WHERE id = ?1 AND client_id = ?2 AND status = 'confirmed'",
                params![id, user.as_str()],
            )?;
            if changed == 0 {
                return Err(ServiceError::NotFound(format!("booking {id}")));
            }
            Ok(tx.query_row(
                &format!("SELECT {BOOKING_COLUMNS} FROM bookings WHERE id = ?1"),
                [id],
                booking_from_row,
            )?)
        })
    }

    pub fn bookings_for_vehicle(&self, vehicle_id: &VehicleId) -> Result<Vec<Booking>> {
        let conn = self.lock();
        let mut stmt =
            conn.prepare(&format!("SELECT {BOOKING_COLUMNS} FROM bookings WHERE vehicle_id = ?1 ORDER BY id"))?;
        let rows = stmt.query_map([vehicle_id.as_str()], booking_from_row)?;
        Ok(rows.collect::<rusqlite::Result<_>>()?)
    }
}

fn upsert_partner(tx: &Transaction<'_>, partner: &Partner) -> Result<()> {
    let t = &partner.tariff;
    tx.execute(
        "INSERT INTO partners (id, name, rate_travel_cents, rate_standby_cents, rate_distance_cents, included_km) \
         VALUES (?1, ?2, ?3, ?4, ?5, ?6) ON CONFLICT (id) DO UPDATE SET name = excluded.name, \
         rate_travel_cents = excluded.rate_travel_cents, rate_standby_cents = excluded.rate_standby_cents, \
         rate_distance_cents = excluded.rate_distance_cents, included_km = excluded.included_km",
        params![
            partner.id.as_str(),
            partner.name,
            t.rate_travel.0,
            t.rate_standby.0,
            t.rate_distance.0,
            t.included_km
        ],
    )?;
    Ok(())
}

fn upsert_vehicle(tx: &Transaction<'_>, v: &Vehicle) -> Result<()> {
    let partner_known: bool =
        tx.query_row("SELECT EXISTS(SELECT 1 FROM partners WHERE id = ?1)", [v.partner_id.as_str()], |r| r.get(0))?;
    if !partner_known {
        return Err(ServiceError::NotFound(format!("partner {}", v.partner_id)));
    }
    let odometer = i64::try_from(v.odometer_km).map_err(|_| ServiceError::Validation("odometer_km too large".into()))?;
    let mut stmt = tx.prepare_cached(&format!(
        "INSERT INTO vehicles ({VEHICLE_COLUMNS}) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13) \
         ON CONFLICT (id) DO UPDATE SET partner_id = excluded.partner_id, brand = excluded.brand, \
         model = excluded.model, color = excluded.color, air_conditioning = excluded.air_conditioning, \
         price_per_hour_cents = excluded.price_per_hour_cents, fuel_type = excluded.fuel_type, \
         odometer_km = excluded.odometer_km, latitude = excluded.latitude, longitude = excluded.longitude, \
         parking_name = excluded.parking_name, active = excluded.active"
    ))?;
    stmt.execute(params![
        v.id.as_str(),
        v.partner_id.as_str(),
        v.brand,
        v.model,
        v.color,
        v.air_conditioning,
        v.price_per_hour.0,
        v.fuel_type.as_str(),
        odometer,
        v.location.latitude,
        v.location.longitude,
        v.location.parking_name,
        v.active
    ])?;
    Ok(())
}

fn require_vehicle(conn: &Connection, id: &VehicleId) -> Result<()> {
    let known: bool = conn.query_row("SELECT EXISTS(SELECT 1 FROM vehicles WHERE id = ?1)", [id.as_str()], |r| r.get(0))?;
    if known {
        Ok(())
    } else {
        Err(ServiceError::NotFound(format!("vehicle {id}")))
    }
}

const INSERT_RATING: &str = "INSERT INTO ratings (vehicle_id, user_id, comfort, consumption, safety, rated_at, \
     external_record_id) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)";

fn insert_rating(stmt: &mut rusqlite::CachedStatement<'_>, r: &RatingRecord, external: Option<&str>) -> Result<()> {
    stmt.execute(params![
        r.vehicle_id.as_str(),
        r.user_id.as_str(),
        r.comfort,
        r.consumption,
        r.safety,
        micros(r.timestamp),
        external
    ])?;
    Ok(())
}

fn summary(conn: &Connection, id: &VehicleId) -> rusqlite::Result<RatingSummary> {
    conn.query_row(
        "SELECT COUNT(*), COALESCE(SUM(comfort), 0), COALESCE(SUM(consumption), 0), COALESCE(SUM(safety), 0) \
         FROM ratings WHERE vehicle_id = ?1",
        [id.as_str()],
        |r| summary_from_row(r, 0),
    )
}
