//! CSV emission and re-reading.
//!
//! Format: UTF-8, LF line endings, `,` separator, `.` decimal point. Leading
//! `#` lines carry the tool version and scenario hash. Floats are written
//! with 17 significant digits so a re-read reproduces the in-memory values
//! exactly.

use crate::error::{CliError, Result};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => {
                debug_assert!(!s.contains(',') && !s.contains('\n'));
                s.clone()
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(comments: Vec<String>, columns: Vec<&str>) -> Self {
        Self {
            comments,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&rendered.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    }
}

/// 17 significant digits; round-trips every finite f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Re-reads a CSV written by [`Table::write`]: comments, header, raw cells.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut comments = Vec::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(c) = line.strip_prefix("# ") {
            comments.push(c.to_string());
        } else if columns.is_empty() {
            columns = line.split(',').map(|s| s.to_string()).collect();
        } else {
            rows.push(line.split(',').map(|s| s.to_string()).collect());
        }
    }
    Ok((comments, columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip_is_exact() {
        for &v in &[
            0.5,
            1.0 / 3.0,
            std::f64::consts::PI,
            8.5f64.log2() / 3.0,
            1e-300,
            -2.5e17,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s} -> {back}");
        }
    }

    #[test]
    fn table_renders_and_rereads() {
        let dir = std::env::temp_dir().join(format!("cyclocap-csv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");

        let mut t = Table::new(vec!["tool vX scenario=abc".into()], vec!["n", "c", "label"]);
        t.push(vec![Cell::Int(1), Cell::Float(0.1 + 0.2), Cell::Text("2+1/2".into())]);
        t.push(vec![Cell::Int(2), Cell::Float(-1.5), Cell::Text("3+0/1".into())]);
        t.write(&path).unwrap();

        let raw = std::fs::read(&path).unwrap();
        assert!(!raw.contains(&b'\r'), "line endings must be LF");

        let (comments, columns, rows) = read_csv(&path).unwrap();
        assert_eq!(comments, vec!["tool vX scenario=abc".to_string()]);
        assert_eq!(columns, vec!["n", "c", "label"]);
        assert_eq!(rows.len(), 2);
        let back: f64 = rows[0][1].parse().unwrap();
        assert_eq!(back.to_bits(), (0.1f64 + 0.2).to_bits());

        std::fs::remove_dir_all(&dir).ok();
    }
}
