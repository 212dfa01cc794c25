//! Vehicle ranking: user judgments give criterion weights, rating averages
//! give per-criterion priorities over vehicles, and the two are combined
//! into one ordered list.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ahp::{
    self, aggregate_global, build_pairwise, consistency_report, principal_weights, ratio_matrix,
    AhpError, ConsistencyReport, WeightVector,
};
use crate::fleet::{RatingCategory, RatingSummary, VehicleId};

/// Upper bound on the number of criteria a user is asked to compare.
pub const MAX_CRITERIA: usize = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("no vehicles to rank")]
    EmptyFleet,
    #[error("at least one criterion is required")]
    NoCriteria,
    #[error("{count} criteria given; at most {max} are supported")]
    TooManyCriteria { count: usize, max: usize },
    #[error("expected {expected} judgments for {criteria} criteria, got {actual}")]
    JudgmentCount {
        criteria: usize,
        expected: usize,
        actual: usize,
    },
    #[error("judgment {value} at position {index} is not on the 1-9 scale or its reciprocals")]
    NotSaaty { index: usize, value: f64 },
    #[error("criterion {0:?} is listed more than once")]
    DuplicateCriterion(String),
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error("vehicle {vehicle} has no score for criterion {criterion:?}")]
    MissingScore { criterion: String, vehicle: VehicleId },
    #[error("vehicle {vehicle} has score {value} on {criterion:?}, outside [1, 5]")]
    ScoreOutOfRange {
        criterion: String,
        vehicle: VehicleId,
        value: f64,
    },
    #[error("vehicle {0} appears more than once")]
    DuplicateVehicle(VehicleId),
    #[error("vehicle {0} is not in the ranked list")]
    UnknownVehicle(VehicleId),
    #[error(transparent)]
    Ahp(#[from] AhpError),
}

/// A vehicle as seen by the ranking: its rating summary plus optional extra
/// criterion scores on the same 1-5 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub vehicle_id: VehicleId,
    pub ratings: RatingSummary,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, f64>,
}

impl Candidate {
    pub fn new(vehicle_id: VehicleId, ratings: RatingSummary) -> Self {
        Candidate {
            vehicle_id,
            ratings,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attribute(mut self, name: &str, score: f64) -> Self {
        self.attributes.insert(normalize_name(name), score);
        self
    }
}

fn normalize_name(name: &str) -> String {
    name.trim().to_ascii_lowercase()
}

/// A criterion resolved from its name: one of the rating categories (under
/// either its own name or its display label), or a named candidate attribute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Criterion {
    Rating(RatingCategory),
    Attribute(String),
}

impl Criterion {
    pub fn from_name(name: &str) -> Result<Self, RankError> {
        let key = normalize_name(name);
        if key.is_empty() {
            return Err(RankError::UnknownCriterion(name.to_owned()));
        }
        Ok(RatingCategory::from_name(&key).map_or(Criterion::Attribute(key), Criterion::Rating))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    /// Eigenvector of an explicit ratio matrix per criterion.
    Matrix,
    /// Scores normalized directly; equal to `Matrix` because ratio
    /// matrices are consistent.
    Fast,
}

impl RankMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RankMode::Matrix => "matrix",
            RankMode::Fast => "fast",
        }
    }
}

impl std::str::FromStr for RankMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matrix" => Ok(RankMode::Matrix),
            "fast" => Ok(RankMode::Fast),
            other => Err(format!("unknown mode {other:?}, expected matrix or fast")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct PreferenceProfile {
    criteria: Vec<String>,
    judgments: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    criteria: Vec<String>,
    judgments: Vec<f64>,
}

impl TryFrom<RawProfile> for PreferenceProfile {
    type Error = RankError;
    fn try_from(raw: RawProfile) -> Result<Self, RankError> {
        PreferenceProfile::new(raw.criteria, raw.judgments)
    }
}

impl From<PreferenceProfile> for RawProfile {
    fn from(p: PreferenceProfile) -> Self {
        RawProfile {
            criteria: p.criteria,
            judgments: p.judgments,
        }
    }
}

impl PreferenceProfile {
    /// `judgments` is the upper triangle of the criteria comparison matrix,
    /// row by row: `criteria[0]` vs each later criterion, then `criteria[1]`...
    pub fn new(criteria: Vec<String>, judgments: Vec<f64>) -> Result<Self, RankError> {
        let k = criteria.len();
        if k == 0 {
            return Err(RankError::NoCriteria);
        }
        if k > MAX_CRITERIA {
            return Err(RankError::TooManyCriteria {
                count: k,
                max: MAX_CRITERIA,
            });
        }
        let expected = k * (k - 1) / 2;
        if judgments.len() != expected {
            return Err(RankError::JudgmentCount {
                criteria: k,
                expected,
                actual: judgments.len(),
            });
        }
        if let Some((index, &value)) = judgments
            .iter()
            .enumerate()
            .find(|(_, v)| !ahp::is_saaty_judgment(**v))
        {
            return Err(RankError::NotSaaty { index, value });
        }
        let mut seen = BTreeSet::new();
        for name in &criteria {
            if !seen.insert(Criterion::from_name(name)?) {
                return Err(RankError::DuplicateCriterion(name.clone()));
            }
        }
        Ok(PreferenceProfile { criteria, judgments })
    }

    /// Performance, consumption and security, with performance twice as
    /// important as consumption and four times as important as security.
    pub fn default_profile() -> Self {
        PreferenceProfile::new(
            vec!["performance".into(), "consumption".into(), "security".into()],
            vec![2.0, 4.0, 2.0],
        )
        .expect("static profile is valid")
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    pub fn judgments(&self) -> &[f64] {
        &self.judgments
    }
}

/// Scores on the 1-5 scale for one criterion, in candidate order.
pub fn criterion_scores(candidates: &[Candidate], criterion: &str) -> Result<Vec<f64>, RankError> {
    if candidates.is_empty() {
        return Err(RankError::EmptyFleet);
    }
    let resolved = Criterion::from_name(criterion)?;
    collect_scores(candidates.iter(), &resolved, criterion)
}

fn collect_scores<'a>(
    candidates: impl Iterator<Item = &'a Candidate>,
    criterion: &Criterion,
    name: &str,
) -> Result<Vec<f64>, RankError> {
    let mut scores = Vec::new();
    let mut any_found = false;
    for c in candidates {
        let value = match criterion {
            Criterion::Rating(category) => c.ratings.mean(*category),
            Criterion::Attribute(key) => match c.attributes.get(key) {
                Some(v) => *v,
                None => {
                    if any_found {
                        return Err(RankError::MissingScore {
                            criterion: name.to_owned(),
                            vehicle: c.vehicle_id.clone(),
                        });
                    }
                    return Err(RankError::UnknownCriterion(name.to_owned()));
                }
            },
        };
        any_found = true;
        if !(1.0..=5.0).contains(&value) {
            return Err(RankError::ScoreOutOfRange {
                criterion: name.to_owned(),
                vehicle: c.vehicle_id.clone(),
                value,
            });
        }
        scores.push(value);
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub vehicle_id: VehicleId,
    pub global_score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
    pub criteria: Vec<String>,
    pub criteria_weights: WeightVector,
    pub consistency: ConsistencyReport,
    pub mode: RankMode,
    /// Vehicle ids in ascending order; the column order of `local_priorities`.
    #[serde(skip)]
    vehicle_order: Vec<VehicleId>,
    #[serde(skip)]
    local_priorities: Vec<WeightVector>,
}

impl RankedList {
    pub fn entry(&self, id: &VehicleId) -> Option<&RankedEntry> {
        self.entries.iter().find(|e| &e.vehicle_id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &VehicleId> {
        self.entries.iter().map(|e| &e.vehicle_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub criterion: String,
    pub weight: f64,
    pub local_priority: f64,
    pub contribution: f64,
}

/// Ranks candidates by their AHP global score. Candidates are processed in
/// ascending id order, so the result does not depend on input order.
pub fn rank_vehicles(
    candidates: &[Candidate],
    prefs: &PreferenceProfile,
    mode: RankMode,
) -> Result<RankedList, RankError> {
    if candidates.is_empty() {
        return Err(RankError::EmptyFleet);
    }
    let mut sorted: Vec<&Candidate> = candidates.iter().collect();
    sorted.sort_by(|a, b| a.vehicle_id.cmp(&b.vehicle_id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].vehicle_id == w[1].vehicle_id) {
        return Err(RankError::DuplicateVehicle(w[0].vehicle_id.clone()));
    }

    let k = prefs.criteria.len();
    let criteria_matrix = build_pairwise(k, &prefs.judgments)?;
    let (criteria_weights, lambda_max) = principal_weights(&criteria_matrix)?;
    let consistency = consistency_report(&criteria_matrix, lambda_max)?;

    let mut local_priorities = Vec::with_capacity(k);
    for name in &prefs.criteria {
        let criterion = Criterion::from_name(name)?;
        let scores = collect_scores(sorted.iter().copied(), &criterion, name)?;
        let local = match mode {
            RankMode::Matrix => principal_weights(&ratio_matrix(&scores)?)?.0,
            RankMode::Fast => WeightVector::normalize(&scores)?,
        };
        local_priorities.push(local);
    }

    let global = aggregate_global(&criteria_weights, &local_priorities)?;
    let mut order: Vec<usize> = (0..sorted.len()).collect();
    // Ids are already ascending, so a stable sort on score alone breaks ties by id.
    order.sort_by(|&a, &b| global[b].total_cmp(&global[a]));
    let entries = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| RankedEntry {
            vehicle_id: sorted[i].vehicle_id.clone(),
            global_score: global[i],
            rank: pos + 1,
        })
        .collect();

    Ok(RankedList {
        entries,
        criteria: prefs.criteria.clone(),
        criteria_weights,
        consistency,
        mode,
        vehicle_order: sorted.iter().map(|c| c.vehicle_id.clone()).collect(),
        local_priorities,
    })
}

/// Per-criterion breakdown of one vehicle's global score.
pub fn explain(list: &RankedList, id: &VehicleId) -> Result<Vec<Contribution>, RankError> {
    let column = list
        .vehicle_order
        .binary_search(id)
        .map_err(|_| RankError::UnknownVehicle(id.clone()))?;
    Ok(list
        .criteria
        .iter()
        .zip(list.criteria_weights.as_slice())
        .zip(&list.local_priorities)
        .map(|((criterion, &weight), local)| Contribution {
            criterion: criterion.clone(),
            weight,
            local_priority: local[column],
            contribution: weight * local[column],
        })
        .collect())
}
