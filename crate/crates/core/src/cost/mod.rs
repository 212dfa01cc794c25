//! Trip quoting, ownership-versus-carsharing savings and environmental
//! estimates. Money is always integer cents.

mod money;
pub mod table1;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use money::Cents;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("{field} must be non-negative, got {value}")]
    NegativeAmount { field: &'static str, value: i64 },
    #[error("distance {0} km must be finite and non-negative")]
    InvalidDistance(f64),
    #[error("amount overflows the money range")]
    Overflow,
    #[error("pricing is undefined for anm={anm}, adt={adt}")]
    PricingUndefined { anm: u32, adt: u32 },
    #[error("pricing table: {0}")]
    PricingTable(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-partner pricing. Rates are cents per minute (travel, standby) and
/// cents per kilometre beyond the free allowance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tariff {
    pub rate_travel: Cents,
    pub rate_standby: Cents,
    pub rate_distance: Cents,
    pub included_km: u32,
}

impl Tariff {
    pub fn validate(&self) -> Result<(), CostError> {
        for (field, rate) in [
            ("rate_travel", self.rate_travel),
            ("rate_standby", self.rate_standby),
            ("rate_distance", self.rate_distance),
        ] {
            if rate.0 < 0 {
                return Err(CostError::NegativeAmount { field, value: rate.0 });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripPlan {
    pub travel_minutes: u32,
    pub standby_minutes: u32,
    pub distance_km: f64,
}

impl TripPlan {
    pub fn validate(&self) -> Result<(), CostError> {
        if self.distance_km.is_finite() && self.distance_km >= 0.0 {
            Ok(())
        } else {
            Err(CostError::InvalidDistance(self.distance_km))
        }
    }

    /// Distance rounded to whole metres; all distance pricing works from this.
    pub fn distance_m(&self) -> u64 {
        (self.distance_km * 1000.0).round() as u64
    }
}

/// `travel * rate_travel + standby * rate_standby + excess_km * rate_distance`,
/// with the distance term rounded half-up to the cent.
pub fn quote_trip(tariff: &Tariff, plan: &TripPlan) -> Result<Cents, CostError> {
    tariff.validate()?;
    plan.validate()?;
    let time = i128::from(tariff.rate_travel.0) * i128::from(plan.travel_minutes)
        + i128::from(tariff.rate_standby.0) * i128::from(plan.standby_minutes);
    let excess_m = plan
        .distance_m()
        .saturating_sub(u64::from(tariff.included_km) * 1000);
    let distance = (i128::from(tariff.rate_distance.0) * i128::from(excess_m) + 500) / 1000;
    i64::try_from(time + distance)
        .map(Cents)
        .map_err(|_| CostError::Overflow)
}

/// Monthly cost of owning a car, by line item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnershipProfile {
    pub car_payment: Cents,
    pub insurance: Cents,
    pub gas: Cents,
    pub license_registration_taxes: Cents,
    pub maintenance: Cents,
    pub parking: Cents,
}

impl OwnershipProfile {
    /// $300 payment, $30 insurance, $100 gas, $30 licence/registration/taxes,
    /// $30 maintenance and $60 parking: $550 a month.
    pub fn baseline() -> Self {
        OwnershipProfile {
            car_payment: Cents::from_dollars(300),
            insurance: Cents::from_dollars(30),
            gas: Cents::from_dollars(100),
            license_registration_taxes: Cents::from_dollars(30),
            maintenance: Cents::from_dollars(30),
            parking: Cents::from_dollars(60),
        }
    }

    pub fn items(&self) -> [(&'static str, Cents); 6] {
        [
            ("car_payment", self.car_payment),
            ("insurance", self.insurance),
            ("gas", self.gas),
            ("license_registration_taxes", self.license_registration_taxes),
            ("maintenance", self.maintenance),
            ("parking", self.parking),
        ]
    }

    pub fn validate(&self) -> Result<(), CostError> {
        match self.items().into_iter().find(|(_, c)| c.0 < 0) {
            Some((field, c)) => Err(CostError::NegativeAmount { field, value: c.0 }),
            None => Ok(()),
        }
    }

    pub fn monthly_total(&self) -> Cents {
        self.items().into_iter().map(|(_, c)| c).sum()
    }
}

/// Monthly and yearly savings; `sy` is always exactly `12 * sm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SavingsResult {
    sm: Cents,
    sy: Cents,
}

impl SavingsResult {
    pub fn from_monthly(sm: Cents) -> Self {
        SavingsResult { sm, sy: sm * 12 }
    }

    pub fn sm(&self) -> Cents {
        self.sm
    }

    pub fn sy(&self) -> Cents {
        self.sy
    }
}

/// Ownership cost minus carsharing cost. Negative results mean carsharing is
/// the more expensive option.
pub fn monthly_savings(own: &OwnershipProfile, carshare_monthly_cost: Cents) -> SavingsResult {
    debug_assert!(carshare_monthly_cost.0 >= 0);
    SavingsResult::from_monthly(own.monthly_total() - carshare_monthly_cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub anm: u32,
    pub adt: u32,
    pub savings: SavingsResult,
}

/// Savings for every (trips per month, hours per trip) combination, stored
/// row-major by trips per month.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioGrid {
    pub anm_values: Vec<u32>,
    pub adt_values: Vec<u32>,
    pub cells: Vec<GridCell>,
}

impl ScenarioGrid {
    pub fn cell(&self, anm: u32, adt: u32) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.anm == anm && c.adt == adt)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CostError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["anm", "adt", "sm_cents", "sy_cents"])?;
        for c in &self.cells {
            w.write_record([
                c.anm.to_string(),
                c.adt.to_string(),
                c.savings.sm().0.to_string(),
                c.savings.sy().0.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn scenario_grid<F>(
    own: &OwnershipProfile,
    pricing: F,
    anm_values: &[u32],
    adt_values: &[u32],
) -> Result<ScenarioGrid, CostError>
where
    F: Fn(u32, u32) -> Option<Cents>,
{
    let mut cells = Vec::with_capacity(anm_values.len() * adt_values.len());
    for &anm in anm_values {
        for &adt in adt_values {
            let cost = pricing(anm, adt).ok_or(CostError::PricingUndefined { anm, adt })?;
            cells.push(GridCell {
                anm,
                adt,
                savings: monthly_savings(own, cost),
            });
        }
    }
    Ok(ScenarioGrid {
        anm_values: anm_values.to_vec(),
        adt_values: adt_values.to_vec(),
        cells,
    })
}

/// Monthly carsharing cost by (trips per month, hours per trip), loaded from
/// CSV with header `anm,adt,monthly_cost_cents`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PricingTable {
    costs: BTreeMap<(u32, u32), Cents>,
}

#[derive(Deserialize)]
struct PricingRow {
    anm: u32,
    adt: u32,
    monthly_cost_cents: i64,
}

impl PricingTable {
    pub fn from_csv<R: Read>(input: R) -> Result<Self, CostError> {
        let mut reader = csv::Reader::from_reader(input);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if header != ["anm", "adt", "monthly_cost_cents"] {
            return Err(CostError::PricingTable(format!(
                "expected header anm,adt,monthly_cost_cents, got {}",
                header.join(",")
            )));
        }
        let mut costs = BTreeMap::new();
        for row in reader.deserialize() {
            let row: PricingRow = row?;
            if row.monthly_cost_cents < 0 {
                return Err(CostError::NegativeAmount {
                    field: "monthly_cost_cents",
                    value: row.monthly_cost_cents,
                });
            }
            if costs
                .insert((row.anm, row.adt), Cents(row.monthly_cost_cents))
                .is_some()
            {
                return Err(CostError::PricingTable(format!(
                    "duplicate row for anm={}, adt={}",
                    row.anm, row.adt
                )));
            }
        }
        Ok(PricingTable { costs })
    }

    pub fn get(&self, anm: u32, adt: u32) -> Option<Cents> {
        self.costs.get(&(anm, adt)).copied()
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }
}

/// Annual CO2 reduction band of 175-265 kg per carsharing member.
pub const CO2_KG_PER_PERSON: (u64, u64) = (175, 265);

/// Share of car kilometres no longer driven after joining: 15% to 20%.
pub const KM_REDUCTION_SHARE: (f64, f64) = (0.15, 0.20);

pub fn co2_savings(persons: u64) -> (u64, u64) {
    (CO2_KG_PER_PERSON.0 * persons, CO2_KG_PER_PERSON.1 * persons)
}

pub fn km_reduction(annual_km: f64) -> Result<(f64, f64), CostError> {
    if !(annual_km.is_finite() && annual_km >= 0.0) {
        return Err(CostError::InvalidDistance(annual_km));
    }
    Ok((KM_REDUCTION_SHARE.0 * annual_km, KM_REDUCTION_SHARE.1 * annual_km))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tariff(travel: i64, standby: i64, distance: i64, included_km: u32) -> Tariff {
        Tariff {
            rate_travel: Cents(travel),
            rate_standby: Cents(standby),
            rate_distance: Cents(distance),
            included_km,
        }
    }

    fn trip(travel: u32, standby: u32, km: f64) -> TripPlan {
        TripPlan {
            travel_minutes: travel,
            standby_minutes: standby,
            distance_km: km,
        }
    }

    #[test]
    fn quote_examples() {
        assert_eq!(quote_trip(&tariff(30, 10, 0, 0), &trip(60, 30, 0.0)).unwrap(), Cents(2100));
        assert_eq!(quote_trip(&tariff(30, 10, 25, 0), &trip(0, 0, 0.0)).unwrap(), Cents(0));
        assert_eq!(quote_trip(&tariff(0, 0, 50, 20), &trip(0, 0, 25.5)).unwrap(), Cents(275));
    }

    #[test]
    fn quote_rounds_distance_half_up() {
        // 10 m at 50 cents/km is exactly half a cent.
        assert_eq!(quote_trip(&tariff(0, 0, 50, 0), &trip(0, 0, 0.010)).unwrap(), Cents(1));
        assert_eq!(quote_trip(&tariff(0, 0, 50, 0), &trip(0, 0, 0.009)).unwrap(), Cents(0));
        // inside the allowance
        assert_eq!(quote_trip(&tariff(0, 0, 50, 20), &trip(0, 0, 19.0)).unwrap(), Cents(0));
    }

    #[test]
    fn quote_rejects_invalid_inputs() {
        assert!(quote_trip(&tariff(-1, 0, 0, 0), &trip(1, 0, 0.0)).is_err());
        assert!(quote_trip(&tariff(1, 0, 0, 0), &trip(1, 0, -2.0)).is_err());
        assert!(quote_trip(&tariff(1, 0, 0, 0), &trip(1, 0, f64::NAN)).is_err());
        assert!(matches!(
            quote_trip(&tariff(i64::MAX, i64::MAX, 0, 0), &trip(u32::MAX, u32::MAX, 0.0)),
            Err(CostError::Overflow)
        ));
    }

    #[test]
    fn baseline_profile_total() {
        let own = OwnershipProfile::baseline();
        assert_eq!(own.monthly_total(), Cents::from_dollars(550));
        assert!(own.validate().is_ok());
    }

    #[test]
    fn savings_examples() {
        let own = OwnershipProfile::baseline();
        let s = monthly_savings(&own, Cents::from_dollars(8));
        assert_eq!((s.sm(), s.sy()), (Cents::from_dollars(542), Cents::from_dollars(6504)));
        assert_eq!(monthly_savings(&own, Cents(0)).sm(), Cents::from_dollars(550));
        let s = monthly_savings(&own, Cents::from_dollars(553));
        assert_eq!((s.sm(), s.sy()), (Cents::from_dollars(-3), Cents::from_dollars(-36)));
    }

    #[test]
    fn constant_zero_pricing_grid() {
        let grid = scenario_grid(&OwnershipProfile::baseline(), |_, _| Some(Cents(0)), &[1, 4], &[1, 2, 3])
            .unwrap();
        assert_eq!(grid.cells.len(), 6);
        assert!(grid.cells.iter().all(|c| c.savings.sm() == Cents::from_dollars(550)));
    }

    #[test]
    fn undefined_pricing_is_reported() {
        let err = scenario_grid(
            &OwnershipProfile::baseline(),
            |anm, _| (anm < 4).then_some(Cents(0)),
            &[1, 4],
            &[1],
        )
        .unwrap_err();
        assert!(matches!(err, CostError::PricingUndefined { anm: 4, adt: 1 }));
    }

    #[test]
    fn grid_csv_layout() {
        let grid = scenario_grid(&OwnershipProfile::baseline(), |_, _| Some(Cents(100)), &[2], &[3]).unwrap();
        let mut out = Vec::new();
        grid.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "anm,adt,sm_cents,sy_cents\n2,3,54900,658800\n");
    }

    #[test]
    fn pricing_table_rejects_bad_csv() {
        assert!(PricingTable::from_csv("a,b,c\n1,1,1\n".as_bytes()).is_err());
        assert!(PricingTable::from_csv("anm,adt,monthly_cost_cents\n1,1,5\n1,1,6\n".as_bytes()).is_err());
        assert!(PricingTable::from_csv("anm,adt,monthly_cost_cents\n1,1,-5\n".as_bytes()).is_err());
        assert!(PricingTable::from_csv("anm,adt,monthly_cost_cents\n1,x,5\n".as_bytes()).is_err());
    }

    #[test]
    fn environmental_estimates() {
        assert_eq!(co2_savings(1), (175, 265));
        assert_eq!(co2_savings(0), (0, 0));
        assert_eq!(co2_savings(100), (17500, 26500));
        assert_eq!(km_reduction(10000.0).unwrap(), (1500.0, 2000.0));
        assert_eq!(km_reduction(0.0).unwrap(), (0.0, 0.0));
        assert_eq!(km_reduction(1.0).unwrap(), (0.15, 0.20));
        assert!(km_reduction(-1.0).is_err());
    }
}
