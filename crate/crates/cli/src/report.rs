//! Report envelope and its Markdown rendering.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub results: Vec<Value>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config: config.clone(),
            results: Vec::new(),
            warnings: Vec::new(),
            pass: true,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# dilation-lab {}\n\n", self.command);
        out.push_str(&format!(
            "**{}** · schema {}\n\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.schema_version
        ));
        out.push_str("## Configuration\n\n| key | value |\n|---|---|\n");
        if let Value::Object(map) = serde_json::to_value(&self.config).expect("config serializes") {
            for (k, v) in map {
                out.push_str(&format!("| {k} | {} |\n", inline(&v)));
            }
        }
        for (i, r) in self.results.iter().enumerate() {
            let title = r
                .get("name")
                .and_then(Value::as_str)
                .map(str::to_string)
                .unwrap_or_else(|| format!("result {}", i + 1));
            out.push_str(&format!("\n## {title}\n\n"));
            if let Some(pass) = r.get("pass").and_then(Value::as_bool) {
                out.push_str(&format!("{}\n\n", if pass { "PASS" } else { "FAIL" }));
            }
            if let Some(Value::Array(asserts)) = r.get("assertions") {
                out.push_str("| assertion | measured | bound | pass |\n|---|---|---|---|\n");
                for a in asserts {
                    out.push_str(&format!(
                        "| {} | {} | {} | {} |\n",
                        a.get("name").and_then(Value::as_str).unwrap_or(""),
                        inline(a.get("measured").unwrap_or(&Value::Null)),
                        inline(a.get("bound").unwrap_or(&Value::Null)),
                        a.get("pass").and_then(Value::as_bool).unwrap_or(false)
                    ));
                }
                out.push('\n');
            }
            if let Value::Object(map) = r {
                out.push_str("| field | value |\n|---|---|\n");
                for (k, v) in map {
                    if matches!(k.as_str(), "name" | "pass" | "assertions" | "header") {
                        continue;
                    }
                    out.push_str(&format!("| {k} | {} |\n", inline(v)));
                }
                if let Some(h) = map.get("header").and_then(Value::as_str) {
                    out.push_str(&format!("\n_{h}_\n"));
                }
            }
        }
        if !self.warnings.is_empty() {
            out.push_str("\n## Warnings\n\n");
            for w in &self.warnings {
                out.push_str(&format!("- {w}\n"));
            }
        }
        out
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Null => "null".into(),
        other => format!("`{}`", serde_json::to_string(other).expect("json value").replace('|', "\\|")),
    }
}
