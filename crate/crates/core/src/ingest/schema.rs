//! Column type inference, column statistics and min-max normalization.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::parser::RawTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

impl std::fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub missing_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalStats {
    /// Distinct non-missing values in first-appearance order.
    pub categories: Vec<String>,
}

impl CategoricalStats {
    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnStats {
    Numeric(NumericStats),
    Categorical(CategoricalStats),
}

impl ColumnStats {
    pub fn as_numeric(&self) -> Option<&NumericStats> {
        match self {
            ColumnStats::Numeric(s) => Some(s),
            ColumnStats::Categorical(_) => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&CategoricalStats> {
        match self {
            ColumnStats::Categorical(s) => Some(s),
            ColumnStats::Numeric(_) => None,
        }
    }
}

/// Parse a cell as a finite decimal number.
///
/// Accepts an optional sign, digits with an optional fractional part, and an
/// optional exponent. Words such as `NaN` or `inf` and anything that
/// overflows to infinity are rejected.
pub fn parse_number(cell: &str) -> Option<f64> {
    let b = cell.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < b.len() && matches!(b[i], b'e' | b'E') {
        i += 1;
        if i < b.len() && matches!(b[i], b'+' | b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Infer each column's kind. Empty cells count as missing and never affect
/// the decision; a column with no values at all is categorical.
pub fn infer_schema(table: &RawTable) -> Vec<ColumnSchema> {
    table
        .headers
        .iter()
        .enumerate()
        .map(|(index, name)| {
            let mut missing_count = 0;
            let mut present = 0;
            let mut all_numeric = true;
            for cell in table.column(index) {
                if cell.is_empty() {
                    missing_count += 1;
                } else {
                    present += 1;
                    if all_numeric && parse_number(cell).is_none() {
                        all_numeric = false;
                    }
                }
            }
            let kind = if present > 0 && all_numeric {
                ColumnKind::Numeric
            } else {
                ColumnKind::Categorical
            };
            ColumnSchema {
                name: name.clone(),
                kind,
                missing_count,
            }
        })
        .collect()
}

fn numeric_stats(cells: impl Iterator<Item = f64>) -> NumericStats {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0;
    for v in cells {
        min = min.min(v);
        max = max.max(v);
        sum += v;
        count += 1;
    }
    if count == 0 {
        return NumericStats {
            min: 0.0,
            max: 0.0,
            mean: 0.0,
            count: 0,
        };
    }
    // Rounding in the sum can push the mean a hair outside [min, max].
    let mean = (sum / count as f64).clamp(min, max);
    NumericStats {
        min,
        max,
        mean,
        count,
    }
}

pub fn compute_stats(table: &RawTable, schemas: &[ColumnSchema]) -> Vec<ColumnStats> {
    schemas
        .iter()
        .enumerate()
        .map(|(index, schema)| {
            let present = table.column(index).filter(|c| !c.is_empty());
            match schema.kind {
                ColumnKind::Numeric => {
                    ColumnStats::Numeric(numeric_stats(present.filter_map(parse_number)))
                }
                ColumnKind::Categorical => {
                    let mut seen = HashSet::new();
                    let categories = present
                        .filter(|c| seen.insert(*c))
                        .map(str::to_owned)
                        .collect();
                    ColumnStats::Categorical(CategoricalStats { categories })
                }
            }
        })
        .collect()
}

/// Min-max scale `value` onto [-1, 1]. Constant columns map to 0.
pub fn normalize(value: f64, stats: &NumericStats) -> f64 {
    let span = stats.max - stats.min;
    if span > 0.0 {
        (2.0 * ((value - stats.min) / span) - 1.0).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// Min-max scale `value` onto [0, 1]. Constant columns map to 0.5, the
/// same midpoint [`normalize`] picks.
pub fn normalize_unit(value: f64, stats: &NumericStats) -> f64 {
    let span = stats.max - stats.min;
    if span > 0.0 {
        ((value - stats.min) / span).clamp(0.0, 1.0)
    } else {
        0.5
    }
}
