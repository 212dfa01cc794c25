//! Operations behind the `carshare` command-line tool.

pub mod bench;

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use carshare_core::cost::table1::{self, CellDiff};
use carshare_core::cost::{PricingTable, ScenarioGrid};
use carshare_core::fleet::synthetic::{synthetic_fleet, SyntheticFleet};
use carshare_service::Store;

/// Generates the synthetic fleet for `(n, seed)` and replaces the synthetic
/// partner's vehicles in `store` with it.
pub fn seed(store: &Store, n: usize, seed: u64) -> Result<SyntheticFleet> {
    let fleet = synthetic_fleet(n, seed)?;
    store.replace_partner_fleet(&fleet.partner, &fleet.vehicles, &fleet.ratings)?;
    Ok(fleet)
}

pub struct Table1Run {
    pub grid: ScenarioGrid,
    pub diffs: Vec<CellDiff>,
}

/// Reproduces the savings grid from the shipped fixture or from `fixture`.
pub fn table1(fixture: Option<&Path>) -> Result<Table1Run> {
    let pricing = match fixture {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("pricing fixture {}", path.display()))?;
            PricingTable::from_csv(file).with_context(|| format!("pricing fixture {}", path.display()))?
        }
        None => table1::fixture()?,
    };
    let grid = table1::reproduce(&pricing)?;
    let diffs = table1::compare(&grid);
    Ok(Table1Run { grid, diffs })
}

/// Console rendering: one row per scenario, SM and SY in whole dollars per ADT.
pub fn render_table1(grid: &ScenarioGrid) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<10}{:>5}", "scenario", "ANM");
    for adt in &grid.adt_values {
        let _ = write!(out, "{:>14}", format!("ADT={adt} SM/SY"));
    }
    out.push('\n');
    for (i, &anm) in grid.anm_values.iter().enumerate() {
        let roman = ["I", "II", "III", "IV"].get(i).copied().unwrap_or("?");
        let _ = write!(out, "{roman:<10}{anm:>5}");
        for &adt in &grid.adt_values {
            let cell = grid.cell(anm, adt).map(|c| {
                let sm = c.savings.sm().whole_dollars().map_or("-".into(), |d| d.to_string());
                let sy = c.savings.sy().whole_dollars().map_or("-".into(), |d| d.to_string());
                format!("{sm}/{sy}")
            });
            let _ = write!(out, "{:>14}", cell.unwrap_or_else(|| "-".into()));
        }
        out.push('\n');
    }
    out
}

pub fn write_table1_csv(grid: &ScenarioGrid, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    grid.write_csv(BufWriter::new(file))?;
    Ok(())
}

/// Opens a store that must already exist on disk.
pub fn open_existing(path: &Path) -> Result<Store> {
    if !path.is_file() {
        bail!("storage {} not found", path.display());
    }
    Store::open(path).with_context(|| format!("cannot open storage {}", path.display()))
}

pub fn export_snapshot(storage: &Path, out: &Path) -> Result<usize> {
    let bytes = open_existing(storage)?.export_snapshot()?;
    std::fs::write(out, &bytes).with_context(|| format!("cannot write {}", out.display()))?;
    Ok(bytes.len())
}

pub fn restore_snapshot(storage: &Path, input: &Path, force: bool) -> Result<()> {
    let bytes = std::fs::read(input).with_context(|| format!("cannot read {}", input.display()))?;
    let store = Store::open(storage).with_context(|| format!("cannot open storage {}", storage.display()))?;
    store.restore_snapshot(&bytes, force)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_fixture_has_no_diffs() {
        let run = table1(None).unwrap();
        assert!(run.diffs.is_empty());
        let text = render_table1(&run.grid);
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("-3/-36"));
        assert!(text.contains("-82/-984"));
    }

    #[test]
    fn missing_fixture_is_an_error() {
        assert!(table1(Some(Path::new("/nonexistent/pricing.csv"))).is_err());
    }

    #[test]
    fn seed_is_deterministic() {
        let a = Store::open_in_memory().unwrap();
        let b = Store::open_in_memory().unwrap();
        seed(&a, 10, 42).unwrap();
        seed(&b, 10, 42).unwrap();
        seed(&b, 10, 42).unwrap();
        assert_eq!(a.export_snapshot().unwrap(), b.export_snapshot().unwrap());
        assert!(seed(&a, 0, 42).is_err());
    }
}
