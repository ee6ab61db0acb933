//! CSV reports: a `#` header block followed by a plain comma-separated table.

use std::path::Path;

use crate::CliError;

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e6)`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn point(x: &[f64]) -> String {
    x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header block, column names, then rows, with `\n` line endings.
    pub fn render(&self, header: &[String]) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        for line in header {
            buf.extend_from_slice(b"# ");
            buf.extend_from_slice(line.replace('\n', " ").as_bytes());
            buf.push(b'\n');
        }
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
            w.write_record(&self.columns).map_err(|e| CliError::Output(e.to_string()))?;
            for row in &self.rows {
                w.write_record(row).map_err(|e| CliError::Output(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Output(e.to_string()))?;
        }
        Ok(buf)
    }

    pub fn write(&self, path: &Path, header: &[String]) -> Result<(), CliError> {
        let bytes = self.render(header)?;
        std::fs::write(path, bytes).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
    }
}

/// Rows of a CSV produced by [`Table::render`], skipping the header block and column names.
pub fn parse_rows(text: &str) -> Vec<Vec<String>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| format!("{l}\n")).collect();
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes())
        .records()
        .filter_map(Result::ok)
        .map(|r| r.iter().map(str::to_string).collect())
        .collect()
}
