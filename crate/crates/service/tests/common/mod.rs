#![allow(dead_code)]

use std::path::Path;

use carshare_core::cost::{Cents, Tariff};
use carshare_core::fleet::{FuelType, Location, Partner, PartnerId, Vehicle, VehicleId};
use carshare_service::password::HashParams;
use carshare_service::{Config, Service, Store};

pub fn config() -> Config {
    Config {
        hash: HashParams::insecure_fast(),
        admin_token: Some("admin-secret".into()),
        ..Config::default()
    }
}

pub fn partner() -> Partner {
    Partner {
        id: PartnerId::new("citycar"),
        name: "City Car".into(),
        tariff: Tariff {
            rate_travel: Cents(30),
            rate_standby: Cents(10),
            rate_distance: Cents(20),
            included_km: 50,
        },
    }
}

pub fn vehicle(id: &str, lat: f64, lon: f64) -> Vehicle {
    Vehicle {
        id: VehicleId::new(id),
        partner_id: PartnerId::new("citycar"),
        brand: "Renault".into(),
        model: "Zoe".into(),
        color: "white".into(),
        air_conditioning: true,
        price_per_hour: Cents(850),
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

/// A partner and three vehicles around Porto.
pub fn seed(store: &Store) {
    store.upsert_partner(&partner()).unwrap();
    store.upsert_vehicle(&vehicle("v1", 41.1496, -8.6109)).unwrap();
    store.upsert_vehicle(&vehicle("v2", 41.1579, -8.6291)).unwrap();
    store.upsert_vehicle(&vehicle("v3", 41.1780, -8.5980)).unwrap();
}

pub fn memory_service() -> Service {
    let store = Store::open_in_memory().unwrap();
    seed(&store);
    Service::new(store, &config()).unwrap()
}

pub fn file_service(path: &Path) -> Service {
    let store = Store::open(path).unwrap();
    seed(&store);
    Service::new(store, &config()).unwrap()
}
