//! Plain CSV tables with a versioned schema line.
//!
//! Output files start with `# <schema>`, then a header row, then data rows;
//! comma separated, LF terminated, reals at 17 significant digits. Files
//! without a schema line are read as generic CSV.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::{CliError, Result};

pub const SWEEP_SCHEMA: &str = "qgt-sweep-v1";
pub const FIT_SCHEMA: &str = "qgt-fit-v1";
pub const GAP_SCHEMA: &str = "qgt-gap-v1";
pub const BERRY_FIELD_SCHEMA: &str = "qgt-berry-field-v1";

/// Seventeen significant digits round-trip every `f64`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), fmt_real)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &str, header: Vec<String>) -> Self {
        Table { schema: Some(schema.to_string()), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(schema) = &self.schema {
            out.push_str("# ");
            out.push_str(schema);
            out.push('\n');
        }
        for line in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).filter(|l| !l.trim().is_empty()).peekable();
        let schema = match lines.peek() {
            Some(first) if first.starts_with('#') => {
                let s = first.trim_start_matches('#').trim().to_string();
                lines.next();
                Some(s)
            }
            _ => None,
        };
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::schema(path, "no header row"))?
            .split(',')
            .map(|c| c.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.starts_with('#') {
                continue;
            }
            let row: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if row.len() != header.len() {
                return Err(CliError::schema(
                    path,
                    format!("data row {} has {} fields, header has {}", n + 1, row.len(), header.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Table { schema, header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Table::parse(&text, path)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn require_column(&self, name: &str, path: &Path) -> Result<usize> {
        self.column(name).ok_or_else(|| CliError::schema(path, format!("missing column `{name}`")))
    }
}

pub fn parse_real(field: &str, column: &str, path: &Path) -> Result<f64> {
    field.parse::<f64>().map_err(|_| CliError::schema(path, format!("column `{column}`: `{field}` is not a number")))
}

/// Writes `contents` to `path` and returns its SHA-256.
pub fn write_file(path: &Path, contents: &str) -> Result<String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(contents.as_bytes()))
}
