use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context as _, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Where and how a subcommand writes its result.
pub struct Sink {
    pub format: Format,
    pub command: &'static str,
    pub seed: u64,
    notes: Vec<String>,
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(
        path: Option<&Path>,
        format: Format,
        command: &'static str,
        seed: u64,
    ) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Sink {
            format,
            command,
            seed,
            notes: Vec::new(),
            out,
        })
    }

    fn header(&mut self, config: &impl Serialize) -> Result<()> {
        writeln!(self.out, "# thermoquery {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(self.out, "# command: {}", self.command)?;
        writeln!(self.out, "# seed: {}", self.seed)?;
        writeln!(self.out, "# config: {}", serde_json::to_string(config)?)?;
        for note in &self.notes {
            writeln!(self.out, "# {note}")?;
        }
        Ok(())
    }

    /// Extra comment line after the CSV header; ignored for JSON.
    pub fn comment(&mut self, line: &str) {
        self.notes.push(line.to_string());
    }

    fn json(&mut self, config: &impl Serialize, key: &str, body: Value) -> Result<()> {
        let doc = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.seed,
            "config": config,
            key: body,
        });
        serde_json::to_writer_pretty(&mut self.out, &doc)?;
        writeln!(self.out)?;
        Ok(())
    }

    /// A table of flat records.
    pub fn rows<T: Serialize>(&mut self, config: &impl Serialize, rows: &[T]) -> Result<()> {
        match self.format {
            Format::Csv => {
                self.header(config)?;
                let mut w = csv::Writer::from_writer(&mut self.out);
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            Format::Json => self.json(config, "rows", serde_json::to_value(rows)?)?,
        }
        Ok(())
    }

    /// A table written by `write_csv` in CSV mode and as `value` in JSON mode.
    pub fn custom(
        &mut self,
        config: &impl Serialize,
        value: &impl Serialize,
        write_csv: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<()> {
        match self.format {
            Format::Csv => {
                self.header(config)?;
                write_csv(&mut self.out)?;
            }
            Format::Json => self.json(config, "result", serde_json::to_value(value)?)?,
        }
        Ok(())
    }

    /// A single nested result; CSV mode flattens it to `key,value` rows.
    pub fn record(&mut self, config: &impl Serialize, value: &impl Serialize) -> Result<()> {
        let value = serde_json::to_value(value)?;
        match self.format {
            Format::Csv => {
                self.header(config)?;
                let mut pairs = Vec::new();
                flatten("", &value, &mut pairs);
                let mut w = csv::Writer::from_writer(&mut self.out);
                w.write_record(["key", "value"])?;
                for (k, v) in pairs {
                    w.write_record([k, v])?;
                }
                w.flush()?;
            }
            Format::Json => self.json(config, "result", value)?,
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
