//! CSV ingestion: parsing, schema inference and per-column statistics.

mod parser;
mod schema;

use serde::{Deserialize, Serialize};

pub use parser::{parse_csv, write_csv, CsvOptions, ParseError, RawTable};
pub use schema::{
    compute_stats, infer_schema, normalize, normalize_unit, parse_number, CategoricalStats,
    ColumnKind, ColumnSchema, ColumnStats, NumericStats,
};

use crate::ids;

/// A parsed table together with its inferred schema and statistics.
/// `schemas`, `stats` and `table.headers` are index-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub table: RawTable,
    pub schemas: Vec<ColumnSchema>,
    pub stats: Vec<ColumnStats>,
}

impl Dataset {
    /// Infer schema and stats for `table` under a fresh random id.
    pub fn from_table(table: RawTable) -> Self {
        Self::with_id(ids::new_id(), table)
    }

    pub fn with_id(id: impl Into<String>, table: RawTable) -> Self {
        let schemas = infer_schema(&table);
        let stats = compute_stats(&table, &schemas);
        Self {
            id: id.into(),
            table,
            schemas,
            stats,
        }
    }

    pub fn from_csv(bytes: &[u8], options: &CsvOptions) -> Result<Self, ParseError> {
        parse_csv(bytes, options).map(Self::from_table)
    }

    pub fn row_count(&self) -> usize {
        self.table.row_count()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.table.headers.iter().position(|h| h == name)
    }
}
