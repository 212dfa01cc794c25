//! Wall-clock scaling of `rank_vehicles` over synthetic fleets.

use std::io::Write;
use std::time::Instant;

use carshare_core::fleet::synthetic::{synthetic_fleet, SyntheticFleet};
use carshare_core::fleet::{FleetError, RatingSummary};
use carshare_core::rank::{rank_vehicles, Candidate, PreferenceProfile, RankError, RankMode, RankedList};
use thiserror::Error;

pub const MIN_REPS: usize = 3;
pub const CSV_HEADER: [&str; 7] = ["n", "mode", "reps", "mean_ms", "std_ms", "min_ms", "max_ms"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetitions must be at least {MIN_REPS}, got {0}")]
    TooFewReps(usize),
    #[error("n_list must not be empty")]
    NoSizes,
    #[error("no modes selected")]
    NoModes,
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("rankings differ between repetitions at n={n}, mode {mode}")]
    NonDeterministic { n: usize, mode: &'static str },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub mode: RankMode,
    pub reps: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl BenchRow {
    fn from_samples(n: usize, mode: RankMode, samples: &[f64]) -> Self {
        let reps = samples.len();
        let mean = samples.iter().sum::<f64>() / reps as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps.max(2) - 1) as f64;
        BenchRow {
            n,
            mode,
            reps,
            mean_ms: mean,
            std_ms: var.sqrt(),
            min_ms: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Candidates with rating summaries, as the ranking endpoint would build them.
pub fn candidates(fleet: &SyntheticFleet) -> Vec<Candidate> {
    let mut totals = std::collections::HashMap::new();
    for r in &fleet.ratings {
        let t = totals.entry(r.vehicle_id.clone()).or_insert([0u64; 4]);
        t[0] += 1;
        t[1] += u64::from(r.comfort);
        t[2] += u64::from(r.consumption);
        t[3] += u64::from(r.safety);
    }
    fleet
        .vehicles
        .iter()
        .map(|v| {
            let summary = totals
                .get(&v.id)
                .map(|t| RatingSummary::from_totals(t[0], t[1], t[2], t[3]))
                .unwrap_or_else(RatingSummary::unrated);
            Candidate::new(v.id.clone(), summary)
        })
        .collect()
}

/// Times `rank_vehicles` with the default profile. Fleet generation is
/// untimed, and one warm-up run precedes the timed repetitions of each
/// (n, mode). Rows are sorted by n, then by the order of `modes`.
pub fn bench_rank(n_list: &[usize], modes: &[RankMode], reps: usize, seed: u64) -> Result<Vec<BenchRow>, BenchError> {
    if reps < MIN_REPS {
        return Err(BenchError::TooFewReps(reps));
    }
    if n_list.is_empty() {
        return Err(BenchError::NoSizes);
    }
    if modes.is_empty() {
        return Err(BenchError::NoModes);
    }
    let mut sizes = n_list.to_vec();
    sizes.sort_unstable();
    let profile = PreferenceProfile::default_profile();
    let mut rows = Vec::new();
    for n in sizes {
        let fleet = candidates(&synthetic_fleet(n, seed)?);
        for &mode in modes {
            let reference: RankedList = rank_vehicles(&fleet, &profile, mode)?;
            let mut samples = Vec::with_capacity(reps);
            for _ in 0..reps {
                let start = Instant::now();
                let list = rank_vehicles(&fleet, &profile, mode)?;
                samples.push(start.elapsed().as_secs_f64() * 1e3);
                if list != reference {
                    return Err(BenchError::NonDeterministic { n, mode: mode.as_str() });
                }
            }
            rows.push(BenchRow::from_samples(n, mode, &samples));
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.mode.as_str().to_string(),
            r.reps.to_string(),
            format!("{:.4}", r.mean_ms),
            format!("{:.4}", r.std_ms),
            format!("{:.4}", r.min_ms),
            format!("{:.4}", r.max_ms),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
