//! Portable JSON export of every table, and its restore.

use rusqlite::types::{Value as SqlValue, ValueRef};
use rusqlite::{params_from_iter, Connection, TransactionBehavior};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, ServiceError};
use crate::store::{Store, TABLES};

pub const SNAPSHOT_FORMAT: &str = "carshare-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Snapshot {
    format: String,
    version: u32,
    tables: Vec<TableDump>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDump {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

fn columns(conn: &Connection, table: &str) -> Result<Vec<String>> {
    let mut stmt = conn.prepare(&format!("SELECT name FROM pragma_table_info('{table}') ORDER BY cid"))?;
    let names = stmt.query_map([], |r| r.get(0))?;
    Ok(names.collect::<rusqlite::Result<_>>()?)
}

fn to_json(table: &str, value: ValueRef<'_>) -> Result<Value> {
    Ok(match value {
        ValueRef::Null => Value::Null,
        ValueRef::Integer(i) => Value::from(i),
        ValueRef::Real(f) => serde_json::Number::from_f64(f)
            .map(Value::Number)
            .ok_or_else(|| ServiceError::Snapshot(format!("{table}: non-finite real")))?,
        ValueRef::Text(t) => Value::String(
            std::str::from_utf8(t)
                .map_err(|_| ServiceError::Snapshot(format!("{table}: text is not UTF-8")))?
                .to_string(),
        ),
        ValueRef::Blob(_) => return Err(ServiceError::Snapshot(format!("{table}: unexpected blob"))),
    })
}

fn to_sql(table: &str, value: &Value) -> Result<SqlValue> {
    Ok(match value {
        Value::Null => SqlValue::Null,
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => SqlValue::Integer(i),
            (None, Some(f)) => SqlValue::Real(f),
            _ => return Err(ServiceError::Snapshot(format!("{table}: number out of range"))),
        },
        Value::String(s) => SqlValue::Text(s.clone()),
        _ => return Err(ServiceError::Snapshot(format!("{table}: unsupported value {value}"))),
    })
}

fn count_rows(conn: &Connection) -> Result<i64> {
    let mut total = 0;
    for table in TABLES {
        total += conn.query_row(&format!("SELECT COUNT(*) FROM {table}"), [], |r| r.get::<_, i64>(0))?;
    }
    Ok(total)
}

impl Store {
    pub fn is_empty(&self) -> Result<bool> {
        Ok(count_rows(&self.lock())? == 0)
    }

    /// Deterministic export: tables in dependency order, rows ordered by primary key.
    pub fn export_snapshot(&self) -> Result<Vec<u8>> {
        let conn = self.lock();
        let mut tables = Vec::with_capacity(TABLES.len());
        for table in TABLES {
            let columns = columns(&conn, table)?;
            let mut stmt = conn.prepare(&format!("SELECT * FROM {table} ORDER BY {}", columns[0]))?;
            let mut rows = Vec::new();
            let mut cursor = stmt.query([])?;
            while let Some(row) = cursor.next()? {
                let values = (0..columns.len())
                    .map(|i| to_json(table, row.get_ref(i)?))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(values);
            }
            tables.push(TableDump {
                name: table.to_string(),
                columns,
                rows,
            });
        }
        let snapshot = Snapshot {
            format: SNAPSHOT_FORMAT.into(),
            version: SNAPSHOT_VERSION,
            tables,
        };
        let mut out = serde_json::to_vec_pretty(&snapshot).map_err(|e| ServiceError::Snapshot(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    /// Loads an export. A non-empty store is refused unless `force`, which
    /// first deletes every existing row.
    pub fn restore_snapshot(&self, bytes: &[u8], force: bool) -> Result<()> {
        let snapshot: Snapshot = serde_json::from_slice(bytes).map_err(|e| ServiceError::Snapshot(e.to_string()))?;
        if snapshot.format != SNAPSHOT_FORMAT || snapshot.version != SNAPSHOT_VERSION {
            return Err(ServiceError::Snapshot(format!(
                "unsupported format {} version {}",
                snapshot.format, snapshot.version
            )));
        }
        let names: Vec<&str> = snapshot.tables.iter().map(|t| t.name.as_str()).collect();
        if names != TABLES {
            return Err(ServiceError::Snapshot(format!("expected tables {TABLES:?}, found {names:?}")));
        }

        let mut conn = self.lock();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        if count_rows(&tx)? > 0 {
            if !force {
                return Err(ServiceError::RestoreRefused);
            }
            for table in TABLES.iter().rev() {
                tx.execute(&format!("DELETE FROM {table}"), [])?;
            }
        }
        for dump in &snapshot.tables {
            let expected = columns(&tx, &dump.name)?;
            if dump.columns != expected {
                return Err(ServiceError::Snapshot(format!(
                    "{}: columns {:?} do not match {:?}",
                    dump.name, dump.columns, expected
                )));
            }
            let placeholders = vec!["?"; expected.len()].join(", ");
            let mut insert = tx.prepare(&format!(
                "INSERT INTO {} ({}) VALUES ({placeholders})",
                dump.name,
                expected.join(", ")
            ))?;
            for row in &dump.rows {
                if row.len() != expected.len() {
                    return Err(ServiceError::Snapshot(format!("{}: row has {} values", dump.name, row.len())));
                }
                let values = row.iter().map(|v| to_sql(&dump.name, v)).collect::<Result<Vec<_>>>()?;
                insert.execute(params_from_iter(values))?;
            }
        }
        tx.commit()?;
        Ok(())
    }
}
