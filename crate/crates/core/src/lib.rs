//! Decision support for choosing carsharing vehicles.
//!
//! - [`ahp`]: pairwise matrices, eigenvector priorities, consistency.
//! - [`fleet`]: vehicles, ratings, area search, external evaluation import.
//! - [`rank`]: turns user judgments and ratings into an ordered vehicle list.
//! - [`cost`]: trip quotes, ownership savings, environmental estimates.
//! - [`geo`]: great-circle distances.

pub mod ahp;
pub mod cost;
pub mod fleet;
pub mod geo;
pub mod rank;
