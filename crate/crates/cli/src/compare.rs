//! Error summary between two population CSVs.

use std::path::Path;

use thiserror::Error;

use crate::table::{format_g, Table, TableError};

#[derive(Debug, Error)]
pub enum CompareError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("first column must be \"time\" in both files")]
    NoTimeColumn,
    #[error("column sets differ: {left:?} vs {right:?}")]
    ColumnMismatch { left: Vec<String>, right: Vec<String> },
    #[error("time {time} of the first file is absent from the second")]
    GridMismatch { time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnError {
    pub column: String,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub columns: Vec<ColumnError>,
    pub max: f64,
    pub mean: f64,
    pub points: usize,
}

impl Comparison {
    /// CSV summary: one row per site column, then `overall`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("column,max_abs_error,mean_abs_error\n");
        for c in &self.columns {
            out.push_str(&format!("{},{},{}\n", c.column, format_g(c.max), format_g(c.mean)));
        }
        out.push_str(&format!("overall,{},{}\n", format_g(self.max), format_g(self.mean)));
        out
    }
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Every row of `a` is matched to the row of `b` with the same time; `b`
/// may hold extra times (an ED grid covering several sweep points).
pub fn compare_tables(a: &Table, b: &Table) -> Result<Comparison, CompareError> {
    if a.header.first().map(String::as_str) != Some("time") || b.header.first().map(String::as_str) != Some("time") {
        return Err(CompareError::NoTimeColumn);
    }
    if a.header != b.header {
        return Err(CompareError::ColumnMismatch {
            left: a.header.clone(),
            right: b.header.clone(),
        });
    }
    let width = a.header.len() - 1;
    let mut max = vec![0.0f64; width];
    let mut sum = vec![0.0f64; width];
    let mut start = 0;
    for row in &a.rows {
        let t = row[0];
        // Both files are sorted in time; scan forward, fall back to a full search.
        let found = b.rows[start..]
            .iter()
            .position(|r| same_time(r[0], t))
            .map(|k| k + start)
            .or_else(|| b.rows.iter().position(|r| same_time(r[0], t)))
            .ok_or(CompareError::GridMismatch { time: t })?;
        start = found;
        for k in 0..width {
            let e = (row[k + 1] - b.rows[found][k + 1]).abs();
            max[k] = max[k].max(e);
            sum[k] += e;
        }
    }
    let n = a.rows.len().max(1) as f64;
    let columns: Vec<ColumnError> = (0..width)
        .map(|k| ColumnError {
            column: a.header[k + 1].clone(),
            max: max[k],
            mean: sum[k] / n,
        })
        .collect();
    Ok(Comparison {
        max: max.iter().copied().fold(0.0, f64::max),
        mean: sum.iter().sum::<f64>() / (n * width.max(1) as f64),
        points: a.rows.len(),
        columns,
    })
}

pub fn compare(a: &Path, b: &Path) -> Result<Comparison, CompareError> {
    compare_tables(&Table::read(a)?, &Table::read(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[[f64; 3]]) -> Table {
        let mut t = Table::new(["time", "site_0", "site_1"]);
        for r in rows {
            t.push(r.to_vec());
        }
        t
    }

    #[test]
    fn identical_tables_have_zero_error() {
        let t = table(&[[0.5, 0.7, 0.3], [1.0, 0.4, 0.6]]);
        let c = compare_tables(&t, &t).unwrap();
        assert_eq!((c.max, c.mean), (0.0, 0.0));
    }

    #[test]
    fn errors_are_per_column_and_overall() {
        let a = table(&[[0.5, 0.7, 0.3], [1.0, 0.4, 0.6]]);
        let b = table(&[[0.25, 0.0, 0.0], [0.5, 0.6, 0.4], [0.75, 0.0, 0.0], [1.0, 0.4, 0.4]]);
        let c = compare_tables(&a, &b).unwrap();
        assert!((c.columns[0].max - 0.1).abs() < 1e-12);
        assert!((c.columns[1].max - 0.2).abs() < 1e-12);
        assert!((c.columns[1].mean - 0.15).abs() < 1e-12);
        assert!((c.max - 0.2).abs() < 1e-12);
        assert!((c.mean - 0.1).abs() < 1e-12);
    }

    #[test]
    fn missing_time_is_a_grid_mismatch() {
        let a = table(&[[0.3, 0.5, 0.5]]);
        let b = table(&[[0.5, 0.5, 0.5]]);
        assert!(matches!(compare_tables(&a, &b), Err(CompareError::GridMismatch { .. })));
    }

    #[test]
    fn differing_columns_are_rejected() {
        let a = table(&[[0.5, 0.5, 0.5]]);
        let mut b = a.clone();
        b.header[2] = "site_2".into();
        assert!(matches!(
            compare_tables(&a, &b),
            Err(CompareError::ColumnMismatch { .. })
        ));
    }
}
