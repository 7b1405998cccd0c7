use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::config::{OutputFormat, RunConfig};

/// A finished run: metadata, one table for CSV output, one JSON value for
/// JSON output.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub discretization: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub result: Value,
}

impl Report {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            result: Value::Null,
            ..Self::default()
        }
    }

    pub fn disc(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.discretization.push((key.into(), value.to_string()));
        self
    }

    pub fn note(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.summary.push((key.into(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        match cfg.output_format {
            OutputFormat::Csv => self.render_csv(cfg),
            OutputFormat::Json => self.render_json(cfg),
        }
    }

    fn render_csv(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# oval-lab {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# subcommand: {}", cfg.subcommand);
        let _ = writeln!(out, "# seed: {}", cfg.seed);
        for (k, v) in cfg.echo() {
            let _ = writeln!(out, "# config: {k} = {v}");
        }
        for (k, v) in &self.discretization {
            let _ = writeln!(out, "# discretization: {k} = {v}");
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary: {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    fn render_json(&self, cfg: &RunConfig) -> String {
        let pairs = |v: &[(String, String)]| -> Map<String, Value> {
            v.iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect()
        };
        let doc = json!({
            "metadata": {
                "tool": "oval-lab",
                "version": env!("CARGO_PKG_VERSION"),
                "subcommand": cfg.subcommand.name(),
                "seed": cfg.seed,
                "config": cfg.echo(),
                "discretization": pairs(&self.discretization),
                "summary": pairs(&self.summary),
            },
            "result": self.result,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}
