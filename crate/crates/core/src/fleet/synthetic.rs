//! Deterministic synthetic fleets for seeding and benchmarks.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FleetError, FuelType, Location, Partner, PartnerId, RatingRecord, UserId, Vehicle, VehicleId};
use crate::cost::{Cents, Tariff};

pub const SYNTHETIC_PARTNER: &str = "synthetic";

const MODELS: [(&str, &str); 8] = [
    ("Renault", "Zoe"),
    ("Smart", "ForTwo"),
    ("Fiat", "500"),
    ("Volkswagen", "Polo"),
    ("Toyota", "Yaris"),
    ("BMW", "i3"),
    ("Peugeot", "208"),
    ("Nissan", "Leaf"),
];
const COLORS: [&str; 6] = ["white", "black", "red", "blue", "grey", "silver"];
const PARKINGS: [&str; 6] = ["Trindade", "Bolhao", "Boavista", "Campanha", "Foz", "Asprela"];

/// Centre of the generated area (Porto).
pub const CENTER: (f64, f64) = (41.1579, -8.6291);

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFleet {
    pub partner: Partner,
    pub vehicles: Vec<Vehicle>,
    pub ratings: Vec<RatingRecord>,
}

pub fn synthetic_partner() -> Partner {
    Partner {
        id: PartnerId::new(SYNTHETIC_PARTNER),
        name: "Synthetic Mobility".into(),
        tariff: Tariff {
            rate_travel: Cents(29),
            rate_standby: Cents(10),
            rate_distance: Cents(25),
            included_km: 50,
        },
    }
}

/// `n` vehicles scattered within about 20 km of [`CENTER`], each with zero
/// to five ratings. The same `(n, seed)` always yields the same fleet.
pub fn synthetic_fleet(n: usize, seed: u64) -> Result<SyntheticFleet, FleetError> {
    if n == 0 {
        return Err(FleetError::InvalidField {
            field: "n",
            reason: "fleet size must be at least 1".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epoch: DateTime<Utc> = Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap();
    let width = n.to_string().len().max(6);
    let mut vehicles = Vec::with_capacity(n);
    let mut ratings = Vec::new();

    for i in 0..n {
        let id = VehicleId(format!("syn-{:0width$}", i + 1));
        let (brand, model) = *MODELS.choose(&mut rng).expect("non-empty");
        let vehicle = Vehicle {
            id: id.clone(),
            partner_id: PartnerId::new(SYNTHETIC_PARTNER),
            brand: brand.into(),
            model: model.into(),
            color: (*COLORS.choose(&mut rng).expect("non-empty")).into(),
            air_conditioning: rng.random_bool(0.8),
            price_per_hour: Cents(rng.random_range(300..=1500)),
            fuel_type: *FuelType::ALL.choose(&mut rng).expect("non-empty"),
            odometer_km: rng.random_range(0..=150_000),
            location: Location {
                latitude: CENTER.0 + rng.random_range(-0.18..=0.18),
                longitude: CENTER.1 + rng.random_range(-0.24..=0.24),
                parking_name: (*PARKINGS.choose(&mut rng).expect("non-empty")).into(),
            },
            active: true,
        };
        for _ in 0..rng.random_range(0..=5) {
            ratings.push(RatingRecord {
                vehicle_id: id.clone(),
                user_id: UserId(format!("synthetic-user-{}", rng.random_range(1..=500))),
                comfort: rng.random_range(1..=5),
                consumption: rng.random_range(1..=5),
                safety: rng.random_range(1..=5),
                timestamp: epoch + Duration::seconds(rng.random_range(0..31_536_000)),
            });
        }
        vehicles.push(vehicle);
    }

    Ok(SyntheticFleet {
        partner: synthetic_partner(),
        vehicles,
        ratings,
    })
}
