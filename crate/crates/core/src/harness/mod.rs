//! Example problems, reference solutions and the error studies built on them.

mod audit;
mod examples;
mod simulate;
mod studies;

pub use audit::{locality_audit, LocalityReport};
pub use examples::*;
pub use simulate::*;
pub use studies::*;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Named numeric table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| String::from(*c)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Tables, fitted rates and the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyResult {
    pub example: String,
    pub study: String,
    pub config: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub fits: BTreeMap<String, f64>,
}

impl StudyResult {
    pub fn new(example: impl Into<String>, study: impl Into<String>) -> Self {
        Self {
            example: example.into(),
            study: study.into(),
            ..Self::default()
        }
    }

    pub fn echo(&mut self, key: &str, value: impl core::fmt::Display) {
        self.config.insert(key.into(), alloc::format!("{value}"));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}
