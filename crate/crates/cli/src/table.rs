use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

/// Rows of typed cells under named, described columns.
pub struct Table {
    columns: Vec<(&'static str, &'static str)>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[(&'static str, &'static str)]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    fn csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["schema_version"];
        header.extend(self.columns.iter().map(|c| c.0));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![SCHEMA_VERSION.to_string()];
            rec.extend(row.iter().map(cell));
            w.write_record(&rec)?;
        }
        Ok(w.into_inner().expect("in-memory writer"))
    }

    fn json(&self, params: &impl Serialize) -> serde_json::Result<Vec<u8>> {
        let data: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.0.to_string(), v.clone()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "params": params,
            "data": data,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    fn describe(&self, format: Format) -> String {
        let mut s = String::from("# column  name  description\n");
        let mut i = 1;
        if format == Format::Csv {
            s.push_str("1  schema_version  output schema revision\n");
            i += 1;
        }
        for (name, desc) in &self.columns {
            s.push_str(&format!("{i}  {name}  {desc}\n"));
            i += 1;
        }
        s
    }

    /// Writes the table and, for file output, a `.columns.txt` sidecar.
    /// Returns the data path, or `None` for standard output.
    pub fn write(
        &self,
        target: &Option<PathBuf>,
        default_name: &str,
        format: Format,
        params: &impl Serialize,
    ) -> io::Result<Option<PathBuf>> {
        let bytes = match format {
            Format::Csv => self.csv().map_err(io::Error::other)?,
            Format::Json => self.json(params).map_err(io::Error::other)?,
        };
        let Some(path) = resolve(target, default_name, format) else {
            io::stdout().write_all(&bytes)?;
            return Ok(None);
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes)?;
        fs::write(sidecar(&path), self.describe(format))?;
        Ok(Some(path))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn resolve(target: &Option<PathBuf>, default_name: &str, format: Format) -> Option<PathBuf> {
    let path = match target {
        Some(p) if p.as_os_str() == "-" => return None,
        Some(p) => p.clone(),
        None => PathBuf::from(format!("{default_name}.{}", format.extension())),
    };
    if path.is_absolute() {
        return Some(path);
    }
    match std::env::var_os("KNCS_OUTPUT_DIR") {
        Some(dir) => Some(Path::new(&dir).join(path)),
        None => Some(path),
    }
}

pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".columns.txt");
    PathBuf::from(s)
}

/// A JSON number, or `null` where the value is not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x + 0.0).map_or(Value::Null, Value::Number)
}

pub fn int(x: usize) -> Value {
    Value::from(x)
}
