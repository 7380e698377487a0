//! Per-sample numeric tables written as CSV or JSON.
//!
//! CSV cells use 17 significant digits so that re-reading a file gives back
//! the exact `f64` bits. JSON has no NaN or infinity, so non-finite cells
//! are written as `null` and read back as NaN.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("row {row}: {message}")]
    Cell { row: usize, message: String },
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    pub fn from_csv(src: &str) -> Result<Self, TableError> {
        let mut r = csv::Reader::from_reader(src.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, record) in r.records().enumerate() {
            let row = record?
                .iter()
                .map(|cell| {
                    cell.parse::<f64>().map_err(|e| TableError::Cell {
                        row: i + 1,
                        message: format!("`{cell}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn to_json(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| v.is_finite().then_some(*v)).collect())
            .collect();
        let json = JsonTable {
            columns: self.columns.clone(),
            rows,
        };
        serde_json::to_string_pretty(&json).expect("plain data")
    }

    pub fn from_json(src: &str) -> Result<Self, TableError> {
        let json: JsonTable = serde_json::from_str(src)?;
        let rows = json
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect();
        Ok(Table {
            columns: json.columns,
            rows,
        })
    }
}
