//! The reference four-scenario savings table and the pricing fixture that
//! regenerates it.
//!
//! The fixture holds, for each (trips per month, hours per trip) point, the
//! monthly carsharing cost implied by the reference savings under the
//! [`OwnershipProfile::baseline`] profile. Running the savings pipeline over
//! it must give back every reference cell.

use std::fmt;

use super::{scenario_grid, Cents, CostError, OwnershipProfile, PricingTable, ScenarioGrid};

/// Average trips per month, one scenario each.
pub const ANM_VALUES: [u32; 4] = [1, 4, 8, 12];

/// Average trip duration in hours.
pub const ADT_VALUES: [u32; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

/// Reference monthly savings in dollars, indexed `[scenario][adt - 1]`.
pub const SM_DOLLARS: [[i64; 8]; 4] = [
    [542, 534, 527, 519, 511, 503, 501, 494],
    [519, 494, 466, 438, 410, 383, 355, 327],
    [494, 438, 383, 327, 286, 234, 181, 128],
    [466, 383, 313, 234, 155, 76, -3, -82],
];

/// Reference yearly savings in dollars, indexed like [`SM_DOLLARS`].
pub const SY_DOLLARS: [[i64; 8]; 4] = [
    [6504, 6408, 6324, 6228, 6132, 6036, 6012, 5928],
    [6228, 5928, 5592, 5256, 4920, 4596, 4260, 3924],
    [5928, 5256, 4596, 3924, 3432, 2808, 2172, 1536],
    [5592, 4596, 3756, 2808, 1860, 912, -36, -984],
];

pub const FIXTURE_CSV: &str = include_str!("../../fixtures/table1_pricing.csv");

pub fn fixture() -> Result<PricingTable, CostError> {
    PricingTable::from_csv(FIXTURE_CSV.as_bytes())
}

/// Runs the savings pipeline over the full 4 x 8 grid.
pub fn reproduce(pricing: &PricingTable) -> Result<ScenarioGrid, CostError> {
    scenario_grid(
        &OwnershipProfile::baseline(),
        |anm, adt| pricing.get(anm, adt),
        &ANM_VALUES,
        &ADT_VALUES,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Sm,
    Sy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellDiff {
    pub scenario: usize,
    pub anm: u32,
    pub adt: u32,
    pub column: Column,
    pub expected: Cents,
    pub actual: Option<Cents>,
}

impl fmt::Display for CellDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let roman = ["I", "II", "III", "IV"][self.scenario];
        let column = match self.column {
            Column::Sm => "SM",
            Column::Sy => "SY",
        };
        match self.actual {
            Some(actual) => write!(
                f,
                "scenario {roman} ANM={} ADT={} {column}: expected {}, got {}",
                self.anm, self.adt, self.expected, actual
            ),
            None => write!(
                f,
                "scenario {roman} ANM={} ADT={} {column}: expected {}, cell missing",
                self.anm, self.adt, self.expected
            ),
        }
    }
}

/// Every cell of `grid` that disagrees with the reference table.
pub fn compare(grid: &ScenarioGrid) -> Vec<CellDiff> {
    let mut diffs = Vec::new();
    for (scenario, &anm) in ANM_VALUES.iter().enumerate() {
        for (col, &adt) in ADT_VALUES.iter().enumerate() {
            let cell = grid.cell(anm, adt);
            for (column, expected, actual) in [
                (Column::Sm, SM_DOLLARS[scenario][col], cell.map(|c| c.savings.sm())),
                (Column::Sy, SY_DOLLARS[scenario][col], cell.map(|c| c.savings.sy())),
            ] {
                let expected = Cents::from_dollars(expected);
                if actual != Some(expected) {
                    diffs.push(CellDiff {
                        scenario,
                        anm,
                        adt,
                        column,
                        expected,
                        actual,
                    });
                }
            }
        }
    }
    diffs
}
