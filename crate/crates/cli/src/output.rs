//! Artifact files: CSV tables, two-column plot data and the key-value report.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// 17 significant digits, enough to read every `f64` back exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn emit_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(invalid(format!("row {i} has {} fields, header has {}", row.len(), header.len())));
        }
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

pub fn read_csv(path: &Path) -> io::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| invalid(format!("{}: empty file", path.display())))?
        .split(',')
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|_| invalid(format!("{}:{}: bad number '{s}'", path.display(), i + 2))))
            .collect::<io::Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(invalid(format!("{}:{}: ragged row", path.display(), i + 2)));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Column `name` of a table read by [`read_csv`].
pub fn column(table: &(Vec<String>, Vec<Vec<f64>>), name: &str) -> io::Result<Vec<f64>> {
    let j = table.0.iter().position(|h| h == name).ok_or_else(|| invalid(format!("no column '{name}'")))?;
    Ok(table.1.iter().map(|r| r[j]).collect())
}

/// Gnuplot-style `x y` lines.
pub fn emit_dat(path: &Path, xs: &[f64], ys: &[f64]) -> io::Result<()> {
    if xs.len() != ys.len() {
        return Err(invalid(format!("{} x values, {} y values", xs.len(), ys.len())));
    }
    let mut out = String::new();
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{} {}", fmt_f64(*x), fmt_f64(*y));
    }
    fs::write(path, out)
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            // keep one entry per line whatever the message contains
            let _ = writeln!(out, "{k} = {}", v.replace('\n', " "));
        }
        out
    }

    pub fn parse(text: &str) -> Self {
        let entries =
            text.lines().filter_map(|l| l.split_once(" = ")).map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Report { entries }
    }
}
