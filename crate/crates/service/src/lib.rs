//! Accounts, sessions, bookings, ratings and the JSON API over a SQLite store.

pub mod app;
pub mod config;
pub mod error;
pub mod http;
pub mod password;
pub mod snapshot;
pub mod store;

pub use app::Service;
pub use config::Config;
pub use error::{Result, ServiceError};
pub use store::Store;
