//! Versioned result envelope shared by every subcommand.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A table plus scalar metadata.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub meta: BTreeMap<String, Value>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: u32,
    command: &'a str,
    version: &'a str,
    seed: u64,
    params: &'a Value,
    duration_ms: u128,
    meta: &'a BTreeMap<String, Value>,
    columns: &'a [String],
    rows: &'a [Vec<Value>],
}

pub struct Artifact {
    pub command: &'static str,
    pub seed: u64,
    pub params: Value,
    pub duration_ms: u128,
    pub table: Table,
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

impl Artifact {
    pub fn to_json(&self) -> String {
        let env = Envelope {
            schema: SCHEMA,
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            params: &self.params,
            duration_ms: self.duration_ms,
            meta: &self.table.meta,
            columns: &self.table.columns,
            rows: &self.table.rows,
        };
        let mut s = serde_json::to_string_pretty(&env).expect("artifact is always serializable");
        s.push('\n');
        s
    }

    /// `# key: value` header lines followed by the table.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut out = Vec::new();
        writeln!(out, "# schema: {SCHEMA}")?;
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# version: {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# seed: {}", self.seed)?;
        writeln!(out, "# params: {}", self.params)?;
        writeln!(out, "# duration_ms: {}", self.duration_ms)?;
        for (k, v) in &self.table.meta {
            writeln!(out, "# {k}: {}", cell(v))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.table.columns)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(cell))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Artifact {
        let mut table = Table::new(&["x", "label"]);
        table.push(vec![json!(1.5), json!("a,b")]);
        table.meta("note", "hi");
        Artifact { command: "demo", seed: 3, params: json!({"n": 2}), duration_ms: 7, table }
    }

    #[test]
    fn csv_quotes_and_headers() {
        let s = sample().to_csv().unwrap();
        assert!(s.starts_with("# schema: 1\n# command: demo\n"));
        assert!(s.contains("# note: hi\nx,label\n1.5,\"a,b\"\n"));
    }

    #[test]
    fn json_round_trip() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["rows"][0][1], "a,b");
        assert_eq!(v["params"]["n"], 2);
    }
}
