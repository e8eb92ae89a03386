//! Tables, provenance headers and atomic output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Provenance {
    fn csv_header(&self) -> String {
        format!(
            "# {} {} command={} config_sha256={} seed={}\n",
            self.tool, self.version, self.command, self.config_sha256, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Column names carry their unit, e.g. `current_uA`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&str]) -> Self {
        Table { name, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &'static str, columns: Vec<String>) -> Self {
        Table { name, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self, prov: &Provenance) -> Result<Vec<u8>> {
        let mut buf = prov.csv_header().into_bytes();
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
            w.write_record(&self.columns).map_err(|e| CliError::Serialize(e.to_string()))?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::render)).map_err(|e| CliError::Serialize(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Serialize(e.to_string()))?;
        }
        Ok(buf)
    }

    pub fn to_json(&self, prov: &Provenance) -> Result<Vec<u8>> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.clone(), v.json())).collect()))
            .collect();
        let doc = serde_json::json!({ "provenance": prov, "columns": self.columns, "rows": rows });
        pretty(&doc)
    }
}

fn pretty<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| CliError::Serialize(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Everything a command writes, assembled in memory first.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn table(&mut self, table: &Table, prov: &Provenance, format: Format) -> Result<()> {
        let (ext, bytes) = match format {
            Format::Csv => ("csv", table.to_csv(prov)?),
            Format::Json => ("json", table.to_json(prov)?),
        };
        self.files.push((format!("{}.{ext}", table.name), bytes));
        Ok(())
    }

    /// JSON document with the provenance block under `"provenance"`.
    pub fn report<T: Serialize>(&mut self, name: &str, prov: &Provenance, body: &T) -> Result<()> {
        let mut doc = serde_json::to_value(body).map_err(|e| CliError::Serialize(e.to_string()))?;
        let prov = serde_json::to_value(prov).map_err(|e| CliError::Serialize(e.to_string()))?;
        match &mut doc {
            Value::Object(map) => {
                map.insert("provenance".into(), prov);
            }
            other => {
                doc = serde_json::json!({ "provenance": prov, "result": other.take() });
            }
        }
        self.files.push((format!("{name}.json"), pretty(&doc)?));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file to a temporary in `dir`, then renames them all
    /// into place; a failure before the renames leaves `dir` untouched.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let mut tmp =
                tempfile::Builder::new().prefix(".vcselrc-").tempfile_in(dir).map_err(|e| CliError::io(dir, e))?;
            tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
            #[cfg(unix)]
            {
                use std::os::unix::fs::PermissionsExt;
                // tempfiles are created 0600; results are ordinary files
                fs::set_permissions(tmp.path(), fs::Permissions::from_mode(0o644))
                    .map_err(|e| CliError::io(tmp.path(), e))?;
            }
            tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
            staged.push((tmp, dir.join(name)));
        }
        staged
            .into_iter()
            .map(|(tmp, target)| {
                tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
                Ok(target)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance { tool: TOOL, version: VERSION, command: "test".into(), seed: 7, config_sha256: "ab".into() }
    }

    #[test]
    fn csv_has_provenance_then_header() {
        let mut t = Table::new("t", &["current_uA", "power_mW", "note"]);
        t.push(vec![1.5.into(), None.into(), "x".into()]);
        let s = String::from_utf8(t.to_csv(&prov()).unwrap()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# vcselrc "));
        assert!(lines[0].contains("seed=7"));
        assert_eq!(lines[1], "current_uA,power_mW,note");
        assert_eq!(lines[2], "1.5,,x");
        assert!(!s.contains('\r'));
    }

    #[test]
    fn json_table_keeps_columns() {
        let mut t = Table::new("t", &["a_nm"]);
        t.push(vec![2.0.into()]);
        let v: Value = serde_json::from_slice(&t.to_json(&prov()).unwrap()).unwrap();
        assert_eq!(v["rows"][0]["a_nm"], 2.0);
        assert_eq!(v["provenance"]["seed"], 7);
    }

    #[test]
    fn commit_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = OutputSet::default();
        set.report("r", &prov(), &serde_json::json!({"x": 1})).unwrap();
        set.table(&Table::new("t", &["a"]), &prov(), Format::Csv).unwrap();
        let written = set.commit(dir.path()).unwrap();
        assert_eq!(written.len(), 2);
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2);
    }
}
