//! Numeric traces persisted as CSV and their replica aggregates.

use std::io::{Read, Write};

use serde::Serialize;

use super::HarnessError;
use crate::stats::{mean, std_dev};

/// A table of numeric rows; the first column is the row index (round,
/// sweep, fraction, ...). Missing values are NaN and written as empty cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        // Display is the shortest representation that round-trips.
        x.to_string()
    }
}

impl Trace {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HarnessError> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|&x| cell(x)))?;
        }
        out.flush().map_err(|e| HarnessError::Io {
            path: "<trace>".into(),
            source: e,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, HarnessError> {
        let mut reader = csv::Reader::from_reader(r);
        let columns: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    if s.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        s.parse::<f64>()
                            .map_err(|e| HarnessError::Parse(format!("bad number {s:?}: {e}")))
                    }
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

/// Mean and sample standard deviation across replicas, row by row. Rows
/// are matched by position; the index column is copied from the first
/// trace and NaN entries are skipped.
pub fn aggregate(traces: &[Trace]) -> Result<Trace, HarnessError> {
    let first = traces
        .first()
        .ok_or_else(|| HarnessError::Missing("at least one replica trace".into()))?;
    if traces
        .iter()
        .any(|t| t.columns != first.columns || t.rows.len() != first.rows.len())
    {
        return Err(HarnessError::Parse("replica traces differ in shape".into()));
    }
    let mut columns = vec![first.columns[0].clone()];
    for c in &first.columns[1..] {
        columns.push(format!("mean_{c}"));
        columns.push(format!("std_{c}"));
    }
    let mut out = Trace::new(columns);
    for (r, index_row) in first.rows.iter().enumerate() {
        let mut row = vec![index_row[0]];
        for c in 1..first.columns.len() {
            let xs: Vec<f64> = traces
                .iter()
                .map(|t| t.rows[r][c])
                .filter(|x| !x.is_nan())
                .collect();
            if xs.is_empty() {
                row.extend([f64::NAN, f64::NAN]);
            } else {
                row.extend([mean(&xs), std_dev(&xs)]);
            }
        }
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_bits_and_gaps() {
        let mut t = Trace::new(["i", "x"]);
        t.push(vec![0.0, 0.1 + 0.2]);
        t.push(vec![1.0, f64::NAN]);
        t.push(vec![2.0, 1e-300]);
        let text = t.to_csv_string();
        assert_eq!(text.lines().next(), Some("i,x"));
        assert!(text.contains("\n1,\n"));
        let back = Trace::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.rows[0][1].to_bits(), (0.1f64 + 0.2).to_bits());
        assert!(back.rows[1][1].is_nan());
        assert_eq!(back.rows[2][1], 1e-300);
    }

    #[test]
    fn aggregate_means_by_row() {
        let mut a = Trace::new(["i", "x"]);
        let mut b = Trace::new(["i", "x"]);
        a.push(vec![0.0, 1.0]);
        b.push(vec![0.0, 3.0]);
        a.push(vec![1.0, f64::NAN]);
        b.push(vec![1.0, 5.0]);
        let g = aggregate(&[a.clone(), b]).unwrap();
        assert_eq!(g.columns, vec!["i", "mean_x", "std_x"]);
        assert_eq!(g.rows[0][1], 2.0);
        assert_eq!(g.rows[1][1], 5.0);
        let mut short = Trace::new(["i", "x"]);
        short.push(vec![0.0, 1.0]);
        assert!(aggregate(&[a, short]).is_err());
    }
}
