//! Rendering of command results as tables, JSON or CSV.

use std::io::Write;

use clap::ValueEnum;
use revlw::oracles::format_real;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// Provenance block embedded in every result.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub config: Map<String, Value>,
    pub seeds: Vec<u64>,
    pub wall_ms: Option<u128>,
}

impl Manifest {
    pub fn new(command: &'static str, inputs: Vec<String>) -> Self {
        Self { command, inputs, config: Map::new(), seeds: Vec::new(), wall_ms: None }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.into(), value.into());
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), self.command.into());
        m.insert("inputs".into(), self.inputs.clone().into());
        m.insert("config".into(), Value::Object(self.config.clone()));
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert("seeds".into(), self.seeds.clone().into());
        if let Some(ms) = self.wall_ms {
            m.insert("wall_ms".into(), (ms as u64).into());
        }
        Value::Object(m)
    }
}

/// A result: a JSON object, optionally with a list of records that the table
/// and CSV forms print as rows.
pub struct Doc {
    pub body: Map<String, Value>,
    pub rows: Option<(&'static str, Vec<&'static str>)>,
}

impl Doc {
    pub fn new(body: Value) -> Self {
        match body {
            Value::Object(body) => Self { body, rows: None },
            other => panic!("document body must be an object, got {other}"),
        }
    }

    /// Render the array under `key` as rows with the given columns.
    pub fn with_rows(mut self, key: &'static str, columns: Vec<&'static str>) -> Self {
        self.rows = Some((key, columns));
        self
    }
}

pub fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(x) => match x.as_i64().or_else(|| x.as_u64().map(|u| u as i64)) {
            Some(i) if !x.is_f64() => i.to_string(),
            _ => format_real(x.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        Value::Object(o) => {
            let parts: Vec<String> = o.iter().map(|(k, v)| format!("{k}={}", scalar(v))).collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn manifest_lines(m: &Manifest) -> Vec<String> {
    let mut kv = Vec::new();
    flatten("", &m.to_json(), &mut kv);
    kv.into_iter().map(|(k, v)| format!("# {k}: {v}")).collect()
}

fn records(doc: &Doc) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
    let (key, cols) = doc.rows.as_ref()?;
    let items = doc.body.get(*key)?.as_array()?;
    let rows = items
        .iter()
        .map(|it| cols.iter().map(|c| it.get(*c).map_or_else(|| "-".into(), scalar)).collect())
        .collect();
    Some((cols.clone(), rows))
}

fn rest_kv(doc: &Doc) -> Vec<(String, String)> {
    let mut body = doc.body.clone();
    if let Some((key, _)) = &doc.rows {
        body.remove(*key);
    }
    let mut kv = Vec::new();
    flatten("", &Value::Object(body), &mut kv);
    kv
}

pub fn render(doc: &Doc, manifest: &Manifest, format: Format) -> String {
    match format {
        Format::Json => {
            let mut body = doc.body.clone();
            body.insert("manifest".into(), manifest.to_json());
            let mut s = serde_json::to_string_pretty(&Value::Object(body)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut out = manifest_lines(manifest).join("\n");
            out.push('\n');
            let kv = rest_kv(doc);
            let width = kv.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in kv {
                out.push_str(&format!("{k:<width$}  {v}\n"));
            }
            if let Some((cols, rows)) = records(doc) {
                let mut widths: Vec<usize> = cols.iter().map(|c| c.len()).collect();
                for r in &rows {
                    for (w, cell) in widths.iter_mut().zip(r) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                let line = |cells: Vec<String>| {
                    let padded: Vec<String> =
                        cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}", w = *w)).collect();
                    padded.join("  ").trim_end().to_string() + "\n"
                };
                out.push_str(&line(cols.iter().map(|c| c.to_string()).collect()));
                for r in rows {
                    out.push_str(&line(r));
                }
            }
            out
        }
        Format::Csv => {
            let mut out = manifest_lines(manifest).join("\n");
            out.push('\n');
            let mut w = csv::Writer::from_writer(Vec::new());
            match records(doc) {
                Some((cols, rows)) => {
                    w.write_record(&cols).expect("in-memory write");
                    for r in rows {
                        w.write_record(&r).expect("in-memory write");
                    }
                }
                None => {
                    w.write_record(["key", "value"]).expect("in-memory write");
                    for (k, v) in rest_kv(doc) {
                        w.write_record([k, v]).expect("in-memory write");
                    }
                }
            }
            out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
            out
        }
    }
}

pub fn emit(doc: &Doc, manifest: &Manifest, format: Format) {
    let s = render(doc, manifest, format);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(s.as_bytes());
    let _ = stdout.flush();
}
