//! Vehicle inventory, per-vehicle evaluations and area search.

pub mod import;
pub mod synthetic;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{Cents, Tariff};
use crate::geo::{self, GeoError, GeoPoint};

pub use import::{ImportError, ImportReport, RejectedRecord};

/// Summary value used for every category of a vehicle with no ratings.
pub const NEUTRAL_RATING: f64 = 3.0;

/// User id attached to evaluations imported from external documents.
pub const EXTERNAL_USER_ID: &str = "external";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FleetError {
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("{field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
    #[error("{category} score {value} is outside 1..=5")]
    ScoreOutOfRange { category: RatingCategory, value: u8 },
}

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }
    };
}

string_id!(VehicleId);
string_id!(PartnerId);
string_id!(UserId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FuelType {
    Petrol,
    Diesel,
    Electric,
    Hybrid,
}

impl FuelType {
    pub const ALL: [FuelType; 4] = [FuelType::Petrol, FuelType::Diesel, FuelType::Electric, FuelType::Hybrid];

    pub fn as_str(&self) -> &'static str {
        match self {
            FuelType::Petrol => "petrol",
            FuelType::Diesel => "diesel",
            FuelType::Electric => "electric",
            FuelType::Hybrid => "hybrid",
        }
    }
}

impl FromStr for FuelType {
    type Err = FleetError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FuelType::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| FleetError::InvalidField {
                field: "fuel_type",
                reason: format!("unknown fuel type {s:?}"),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub latitude: f64,
    pub longitude: f64,
    pub parking_name: String,
}

impl Location {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            latitude: self.latitude,
            longitude: self.longitude,
        }
    }
}

/// A carsharing operator and its tariff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partner {
    pub id: PartnerId,
    pub name: String,
    pub tariff: Tariff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    pub partner_id: PartnerId,
    pub brand: String,
    pub model: String,
    pub color: String,
    pub air_conditioning: bool,
    pub price_per_hour: Cents,
    pub fuel_type: FuelType,
    pub odometer_km: u64,
    pub location: Location,
    pub active: bool,
}

impl Vehicle {
    pub fn validate(&self) -> Result<(), FleetError> {
        if self.id.0.trim().is_empty() {
            return Err(FleetError::InvalidField {
                field: "id",
                reason: "must not be empty".into(),
            });
        }
        if self.price_per_hour.0 < 0 {
            return Err(FleetError::InvalidField {
                field: "price_per_hour",
                reason: format!("{} is negative", self.price_per_hour),
            });
        }
        self.location.point().validate()?;
        Ok(())
    }
}

/// The three evaluation categories. Display labels follow the listing
/// screen: comfort is shown as performance and safety as security.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingCategory {
    Comfort,
    Consumption,
    Safety,
}

impl RatingCategory {
    pub const ALL: [RatingCategory; 3] = [RatingCategory::Comfort, RatingCategory::Consumption, RatingCategory::Safety];

    pub fn as_str(&self) -> &'static str {
        match self {
            RatingCategory::Comfort => "comfort",
            RatingCategory::Consumption => "consumption",
            RatingCategory::Safety => "safety",
        }
    }

    pub fn display_label(&self) -> &'static str {
        match self {
            RatingCategory::Comfort => "performance",
            RatingCategory::Consumption => "consumption",
            RatingCategory::Safety => "security",
        }
    }

    /// Accepts both the category name and its display label.
    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "comfort" | "performance" => Some(RatingCategory::Comfort),
            "consumption" => Some(RatingCategory::Consumption),
            "safety" | "security" => Some(RatingCategory::Safety),
            _ => None,
        }
    }
}

impl fmt::Display for RatingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub vehicle_id: VehicleId,
    pub user_id: UserId,
    pub comfort: u8,
    pub consumption: u8,
    pub safety: u8,
    pub timestamp: DateTime<Utc>,
}

impl RatingRecord {
    pub fn score(&self, category: RatingCategory) -> u8 {
        match category {
            RatingCategory::Comfort => self.comfort,
            RatingCategory::Consumption => self.consumption,
            RatingCategory::Safety => self.safety,
        }
    }

    pub fn validate(&self) -> Result<(), FleetError> {
        for category in RatingCategory::ALL {
            let value = self.score(category);
            if !(1..=5).contains(&value) {
                return Err(FleetError::ScoreOutOfRange { category, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub count: u64,
    pub mean_comfort: f64,
    pub mean_consumption: f64,
    pub mean_safety: f64,
    pub overall: f64,
}

impl Default for RatingSummary {
    fn default() -> Self {
        RatingSummary::unrated()
    }
}

impl RatingSummary {
    pub fn unrated() -> Self {
        RatingSummary {
            count: 0,
            mean_comfort: NEUTRAL_RATING,
            mean_consumption: NEUTRAL_RATING,
            mean_safety: NEUTRAL_RATING,
            overall: NEUTRAL_RATING,
        }
    }

    /// Builds a summary from per-category score totals.
    pub fn from_totals(count: u64, comfort: u64, consumption: u64, safety: u64) -> Self {
        if count == 0 {
            return RatingSummary::unrated();
        }
        let n = count as f64;
        let (c, u, s) = (comfort as f64 / n, consumption as f64 / n, safety as f64 / n);
        RatingSummary {
            count,
            mean_comfort: c,
            mean_consumption: u,
            mean_safety: s,
            overall: (c + u + s) / 3.0,
        }
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a RatingRecord>) -> Self {
        let mut totals = [0u64; 4];
        for r in records {
            totals[0] += 1;
            totals[1] += u64::from(r.comfort);
            totals[2] += u64::from(r.consumption);
            totals[3] += u64::from(r.safety);
        }
        RatingSummary::from_totals(totals[0], totals[1], totals[2], totals[3])
    }

    pub fn mean(&self, category: RatingCategory) -> f64 {
        match category {
            RatingCategory::Comfort => self.mean_comfort,
            RatingCategory::Consumption => self.mean_consumption,
            RatingCategory::Safety => self.mean_safety,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearbyVehicle {
    pub vehicle: Vehicle,
    pub distance_km: f64,
}

/// Active vehicles within `radius_km` of `center` (boundary inclusive),
/// nearest first, ties by id.
pub fn within_radius<'a, I>(vehicles: I, center: GeoPoint, radius_km: f64) -> Result<Vec<NearbyVehicle>, FleetError>
where
    I: IntoIterator<Item = &'a Vehicle>,
{
    center.validate()?;
    geo::validate_radius(radius_km)?;
    let mut found: Vec<NearbyVehicle> = vehicles
        .into_iter()
        .filter(|v| v.active)
        .filter_map(|v| {
            let distance_km = geo::great_circle_km(center, v.location.point());
            (distance_km <= radius_km).then(|| NearbyVehicle {
                vehicle: v.clone(),
                distance_km,
            })
        })
        .collect();
    found.sort_by(|a, b| {
        a.distance_km
            .total_cmp(&b.distance_km)
            .then_with(|| a.vehicle.id.cmp(&b.vehicle.id))
    });
    Ok(found)
}

/// In-memory catalog. The service crate keeps the same data in its
/// transactional store; this one backs benchmarks and library use.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    vehicles: BTreeMap<VehicleId, Vehicle>,
    ratings: BTreeMap<VehicleId, Vec<RatingRecord>>,
    imported_records: BTreeSet<String>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn upsert_vehicle(&mut self, vehicle: Vehicle) -> Result<VehicleId, FleetError> {
        vehicle.validate()?;
        let id = vehicle.id.clone();
        self.vehicles.insert(id.clone(), vehicle);
        Ok(id)
    }

    pub fn vehicle(&self, id: &VehicleId) -> Option<&Vehicle> {
        self.vehicles.get(id)
    }

    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        self.vehicles.values()
    }

    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn list_by_area(&self, center: GeoPoint, radius_km: f64) -> Result<Vec<NearbyVehicle>, FleetError> {
        within_radius(self.vehicles.values(), center, radius_km)
    }

    pub fn record_rating(&mut self, rating: RatingRecord) -> Result<(), FleetError> {
        if !self.vehicles.contains_key(&rating.vehicle_id) {
            return Err(FleetError::UnknownVehicle(rating.vehicle_id));
        }
        rating.validate()?;
        self.ratings
            .entry(rating.vehicle_id.clone())
            .or_default()
            .push(rating);
        Ok(())
    }

    pub fn ratings(&self, id: &VehicleId) -> &[RatingRecord] {
        self.ratings.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn rating_summary(&self, id: &VehicleId) -> Result<RatingSummary, FleetError> {
        if !self.vehicles.contains_key(id) {
            return Err(FleetError::UnknownVehicle(id.clone()));
        }
        Ok(RatingSummary::from_records(self.ratings(id)))
    }

    /// Imports an external evaluation document. Records whose id was already
    /// imported, or whose vehicle is unknown, are rejected individually.
    pub fn import_external(&mut self, xml: &[u8], now: DateTime<Utc>) -> Result<ImportReport, ImportError> {
        let parsed = import::parse_document(xml, now)?;
        let mut report = ImportReport {
            accepted: 0,
            rejected: parsed.rejected,
        };
        for (position, evaluation) in parsed.evaluations {
            let reject = |reason: String| RejectedRecord {
                position,
                record_id: Some(evaluation.record_id.clone()),
                reason,
            };
            if self.imported_records.contains(&evaluation.record_id) {
                report.rejected.push(reject("record already imported".into()));
                continue;
            }
            match self.record_rating(evaluation.rating.clone()) {
                Ok(()) => {
                    self.imported_records.insert(evaluation.record_id);
                    report.accepted += 1;
                }
                Err(e) => report.rejected.push(reject(e.to_string())),
            }
        }
        report.rejected.sort_by_key(|r| r.position);
        Ok(report)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn vehicle(id: &str, lat: f64, lon: f64) -> Vehicle {
        Vehicle {
            id: VehicleId::new(id),
            partner_id: PartnerId::new("p1"),
            brand: "Renault".into(),
            model: "Zoe".into(),
            color: "white".into(),
            air_conditioning: true,
            price_per_hour: Cents(650),
            fuel_type: FuelType::Electric,
            odometer_km: 12_000,
            location: Location {
                latitude: lat,
                longitude: lon,
                parking_name: "Trindade".into(),
            },
            active: true,
        }
    }

    pub(crate) fn rating(id: &str, scores: (u8, u8, u8)) -> RatingRecord {
        RatingRecord {
            vehicle_id: VehicleId::new(id),
            user_id: UserId::new("u1"),
            comfort: scores.0,
            consumption: scores.1,
            safety: scores.2,
            timestamp: Utc.with_ymd_and_hms(2026, 1, 1, 12, 0, 0).unwrap(),
        }
    }

    #[test]
    fn upsert_and_list() {
        let mut c = Catalog::new();
        let id = c.upsert_vehicle(vehicle("v1", 41.15, -8.61)).unwrap();
        assert_eq!(id, VehicleId::new("v1"));
        let found = c.list_by_area(GeoPoint::new(41.15, -8.61).unwrap(), 1.0).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].distance_km, 0.0);
    }

    #[test]
    fn upsert_rejects_bad_latitude() {
        let mut c = Catalog::new();
        assert!(matches!(
            c.upsert_vehicle(vehicle("v1", 95.0, 0.0)),
            Err(FleetError::Geo(GeoError::Latitude(_)))
        ));
        let mut v = vehicle("v2", 0.0, 0.0);
        v.price_per_hour = Cents(-1);
        assert!(c.upsert_vehicle(v).is_err());
        assert!(c.is_empty());
    }

    #[test]
    fn upsert_replaces() {
        let mut c = Catalog::new();
        c.upsert_vehicle(vehicle("v1", 41.0, -8.0)).unwrap();
        let mut v = vehicle("v1", 41.0, -8.0);
        v.color = "red".into();
        c.upsert_vehicle(v).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.vehicle(&"v1".into()).unwrap().color, "red");
    }

    #[test]
    fn antipode_is_excluded_and_inactive_hidden() {
        let mut c = Catalog::new();
        let center = GeoPoint::new(41.15, -8.61).unwrap();
        let anti = center.antipode();
        c.upsert_vehicle(vehicle("far", anti.latitude, anti.longitude)).unwrap();
        let mut parked = vehicle("off", 41.15, -8.61);
        parked.active = false;
        c.upsert_vehicle(parked).unwrap();
        assert!(c.list_by_area(center, 10.0).unwrap().is_empty());
        assert!(c.list_by_area(center, 0.0).is_err());
        assert!(c.list_by_area(GeoPoint { latitude: 91.0, longitude: 0.0 }, 1.0).is_err());
    }

    #[test]
    fn ordering_by_distance_then_id() {
        let mut c = Catalog::new();
        c.upsert_vehicle(vehicle("b", 41.16, -8.61)).unwrap();
        c.upsert_vehicle(vehicle("a", 41.16, -8.61)).unwrap();
        c.upsert_vehicle(vehicle("c", 41.15, -8.61)).unwrap();
        let ids: Vec<_> = c
            .list_by_area(GeoPoint::new(41.15, -8.61).unwrap(), 5.0)
            .unwrap()
            .into_iter()
            .map(|n| n.vehicle.id.0)
            .collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn ratings_and_summary() {
        let mut c = Catalog::new();
        c.upsert_vehicle(vehicle("v1", 0.0, 0.0)).unwrap();
        let empty = c.rating_summary(&"v1".into()).unwrap();
        assert_eq!(empty.count, 0);
        assert_eq!(
            (empty.mean_comfort, empty.mean_consumption, empty.mean_safety),
            (3.0, 3.0, 3.0)
        );

        c.record_rating(rating("v1", (5, 4, 3))).unwrap();
        let s = c.rating_summary(&"v1".into()).unwrap();
        assert_eq!((s.count, s.mean_comfort, s.mean_consumption, s.mean_safety), (1, 5.0, 4.0, 3.0));
        assert_eq!(s.overall, 4.0);

        assert!(matches!(
            c.record_rating(rating("v1", (6, 4, 3))),
            Err(FleetError::ScoreOutOfRange { value: 6, .. })
        ));
        assert!(c.record_rating(rating("v1", (0, 4, 3))).is_err());
        assert_eq!(c.rating_summary(&"v1".into()).unwrap().count, 1);
        assert!(matches!(
            c.record_rating(rating("nope", (1, 1, 1))),
            Err(FleetError::UnknownVehicle(_))
        ));
        assert!(c.rating_summary(&"nope".into()).is_err());
    }

    #[test]
    fn means_over_multiple_ratings() {
        let records = [rating("v", (5, 5, 5)), rating("v", (1, 1, 1))];
        let s = RatingSummary::from_records(&records);
        assert_eq!((s.mean_comfort, s.mean_consumption, s.mean_safety), (3.0, 3.0, 3.0));
        let records = [rating("v", (2, 2, 2)), rating("v", (4, 4, 4))];
        assert_eq!(RatingSummary::from_records(&records).overall, 3.0);
    }

    #[test]
    fn category_names() {
        assert_eq!(RatingCategory::from_name("performance"), Some(RatingCategory::Comfort));
        assert_eq!(RatingCategory::from_name("Security"), Some(RatingCategory::Safety));
        assert_eq!(RatingCategory::from_name("price"), None);
        assert_eq!("diesel".parse::<FuelType>().unwrap(), FuelType::Diesel);
        assert!("steam".parse::<FuelType>().is_err());
    }
}
