//! Column-named rows rendered as CSV or JSON from the same data.

use serde_json::{json, Value};

use crate::output::{num, Csv};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(x) => write!(f, "{x}"),
            Cell::Float(x) => write!(f, "{x}"),
            Cell::Text(x) => f.write_str(x),
        }
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&self.columns);
        for row in &self.rows {
            let cells: Vec<&dyn std::fmt::Display> = row.iter().map(|c| c as &dyn std::fmt::Display).collect();
            csv.row(&cells);
        }
        csv.finish()
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with non-finite floats as null.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Int(x) => json!(x),
                        Cell::Float(x) => num(*x),
                        Cell::Text(x) => json!(x),
                    })
                    .collect()
            })
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}
