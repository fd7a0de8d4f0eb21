//! Experiment reports and their CSV / text renderings.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `value <= limit`.
    AtMost,
    /// Passes when `value >= limit`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: String,
    /// The statement under test.
    pub anchor: &'static str,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    pub bound: Bound,
    pub detail: Option<String>,
}

impl Verdict {
    pub fn at_most(check: impl Into<String>, anchor: &'static str, value: f64, limit: f64) -> Self {
        Self {
            check: check.into(),
            anchor,
            // NaN fails.
            passed: value <= limit,
            value,
            limit,
            bound: Bound::AtMost,
            detail: None,
        }
    }

    pub fn at_least(check: impl Into<String>, anchor: &'static str, value: f64, limit: f64) -> Self {
        Self {
            check: check.into(),
            anchor,
            passed: value >= limit,
            value,
            limit,
            bound: Bound::AtLeast,
            detail: None,
        }
    }

    pub fn holds(check: impl Into<String>, anchor: &'static str, ok: bool) -> Self {
        Self::at_least(check, anchor, f64::from(u8::from(ok)), 1.0)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(n) => write!(f, "{n}"),
            // 17 significant digits.
            Cell::Real(x) => write!(f, "{x:.16e}"),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    write!(f, "\"{}\"", s.replace('"', "\"\""))
                } else {
                    f.write_str(s)
                }
            }
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub anchors: Vec<&'static str>,
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
    pub config: Vec<(String, String)>,
    pub version: &'static str,
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "quasalg {}: experiment {}", self.version, self.experiment);
        let _ = writeln!(s, "\nanchors:");
        for a in &self.anchors {
            let _ = writeln!(s, "  - {a}");
        }
        let _ = writeln!(s, "\nconfig:");
        for (k, v) in &self.config {
            let _ = writeln!(s, "  {k} = {v}");
        }
        let _ = writeln!(s, "\nwall time: {:.3} s", self.wall_time.as_secs_f64());
        let _ = writeln!(s, "\nverdicts:");
        for v in &self.verdicts {
            let op = match v.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let _ = writeln!(
                s,
                "  [{}] {}: {:.6e} {op} {:.3e}\n        anchor: {}",
                if v.passed { "PASS" } else { "FAIL" },
                v.check,
                v.value,
                v.limit,
                v.anchor
            );
            if let Some(d) = &v.detail {
                let _ = writeln!(s, "        detail: {d}");
            }
        }
        let _ = writeln!(s, "\ntables:");
        for t in &self.tables {
            let _ = writeln!(s, "  {}.csv: {} rows ({})", t.name, t.rows.len(), t.columns.join(", "));
        }
        let _ = writeln!(s, "\noverall: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct EmitError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, EmitError> {
    fs::write(&path, contents).map_err(|source| EmitError {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `<dir>/<table>.csv` for each table, or `<dir>/report.txt`.
pub fn emit_report(report: &ExperimentReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    fs::create_dir_all(dir).map_err(|source| EmitError {
        path: dir.to_path_buf(),
        source,
    })?;
    match format {
        Format::Csv => report
            .tables
            .iter()
            .map(|t| write(dir.join(format!("{}.csv", t.name)), &t.to_csv()))
            .collect(),
        Format::Text => Ok(vec![write(dir.join("report.txt"), &report.to_text())?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formatting() {
        let mut t = Table::new("t", &["n", "x", "name"]);
        t.push(vec![Cell::from(3usize), Cell::from(0.1), Cell::from("a,b")]);
        assert_eq!(t.to_csv(), "n,x,name\n3,1.0000000000000001e-1,\"a,b\"\n");
    }

    #[test]
    fn nan_fails_both_ways() {
        assert!(!Verdict::at_most("x", "", f64::NAN, 1.0).passed);
        assert!(!Verdict::at_least("x", "", f64::NAN, 1.0).passed);
        assert!(Verdict::holds("x", "", true).passed);
    }

    #[test]
    fn empty_report_fails() {
        let r = ExperimentReport {
            experiment: "none".into(),
            anchors: vec![],
            verdicts: vec![],
            tables: vec![],
            config: vec![],
            version: "0",
            wall_time: Duration::ZERO,
        };
        assert!(!r.passed());
        assert!(r.to_text().contains("overall: FAIL"));
    }
}
