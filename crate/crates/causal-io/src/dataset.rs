//! Header-bearing CSV datasets with integer-coded discrete values.

use crate::{IoError, Result};
use causal_core::scm::{SampleMatrix, VariableDomain};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTable {
    pub columns: Vec<String>,
    values: Vec<f64>,
    rows: usize,
}

impl DatasetTable {
    pub fn new(columns: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = columns.len();
        if n == 0 || values.len() % n != 0 || values.is_empty() {
            return Err(IoError::Semantic("empty or ragged dataset".into()));
        }
        let mut seen = columns.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != columns.len() {
            return Err(IoError::Semantic("duplicate column names".into()));
        }
        let rows = values.len() / n;
        Ok(DatasetTable {
            columns,
            values,
            rows,
        })
    }

    pub fn from_samples(columns: Vec<String>, s: &SampleMatrix) -> Result<Self> {
        DatasetTable::new(columns, s.data().to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.columns.len() + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.columns.len()..(r + 1) * self.columns.len()]
    }

    /// Reorders columns to match `order` (a list of column names).
    pub fn select(&self, order: &[String]) -> Result<DatasetTable> {
        let idx: Vec<usize> = order
            .iter()
            .map(|name| {
                self.columns
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| IoError::Semantic(format!("dataset lacks column {name}")))
            })
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(self.rows * idx.len());
        for r in 0..self.rows {
            for &c in &idx {
                values.push(self.get(r, c));
            }
        }
        DatasetTable::new(order.to_vec(), values)
    }
}

/// Parses a CSV with a header row. Discrete cells may be state names (mapped
/// through `domains`, which pairs each column name with its domain) or
/// integer codes; codes are validated against the cardinality.
pub fn parse_dataset_csv(
    text: &str,
    domains: &[(String, VariableDomain)],
) -> Result<DatasetTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| IoError::Parse {
        line: 1,
        col: 1,
        message: "empty dataset".into(),
    })?;
    let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let domain_of: Vec<Option<&VariableDomain>> = columns
        .iter()
        .map(|c| domains.iter().find(|(n, _)| n == c).map(|(_, d)| d))
        .collect();
    let mut values = Vec::new();
    for (ln, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(IoError::Parse {
                line: ln + 1,
                col: 1,
                message: format!("expected {} cells, found {}", columns.len(), cells.len()),
            });
        }
        for (c, cell) in cells.iter().enumerate() {
            let value = match cell.parse::<f64>() {
                Ok(v) => v,
                Err(_) => match domain_of[c] {
                    Some(VariableDomain::Discrete { states }) => {
                        states.iter().position(|s| s == cell).ok_or_else(|| IoError::Parse {
                            line: ln + 1,
                            col: 1,
                            message: format!(
                                "unknown state {cell:?} for column {}",
                                columns[c]
                            ),
                        })? as f64
                    }
                    _ => {
                        return Err(IoError::Parse {
                            line: ln + 1,
                            col: 1,
                            message: format!("bad numeric cell {cell:?}"),
                        })
                    }
                },
            };
            if let Some(dom) = domain_of[c] {
                if !dom.admits(value) {
                    return Err(IoError::Semantic(format!(
                        "value {value} outside the domain of column {}",
                        columns[c]
                    )));
                }
            }
            values.push(value);
        }
    }
    DatasetTable::new(columns, values)
}

pub fn write_dataset_csv(table: &DatasetTable) -> String {
    let mut out = table.columns.join(",");
    out.push('\n');
    for r in 0..table.rows() {
        let cells: Vec<String> = table.row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
