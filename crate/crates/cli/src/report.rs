use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `at_most` or `at_least`.
    pub bound: &'static str,
    pub pass: bool,
    /// Reported but not part of the exit status.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub residuals: Vec<Residual>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, config: Value) -> Self {
        Self {
            command,
            config,
            residuals: Vec::new(),
            artifacts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.informational || r.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value,tolerance,bound,pass,informational\n");
        for r in &self.residuals {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{},{},{}",
                csv_field(&r.name),
                r.value,
                r.tolerance,
                r.bound,
                r.pass,
                r.informational
            );
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Accumulates residuals, applying `--tol-<name>` overrides by full name or
/// by the part before the first `/`.
pub struct Collector<'a> {
    tolerances: &'a BTreeMap<String, f64>,
    pub residuals: Vec<Residual>,
}

impl<'a> Collector<'a> {
    pub fn new(tolerances: &'a BTreeMap<String, f64>) -> Self {
        Self {
            tolerances,
            residuals: Vec::new(),
        }
    }

    fn tolerance(&self, name: &str, default: f64) -> f64 {
        let stem = name.split('/').next().unwrap_or(name);
        self.tolerances
            .get(name)
            .or_else(|| self.tolerances.get(stem))
            .copied()
            .unwrap_or(default)
    }

    fn push(&mut self, name: &str, value: f64, default: f64, bound: &'static str, informational: bool) {
        let tolerance = self.tolerance(name, default);
        let pass = match bound {
            "at_least" => value >= tolerance,
            _ => value <= tolerance,
        };
        self.residuals.push(Residual {
            name: name.to_string(),
            value,
            tolerance,
            bound,
            pass,
            informational,
            error: None,
        });
    }

    pub fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.push(name, value, tolerance, "at_most", false);
    }

    pub fn info(&mut self, name: &str, value: f64, tolerance: f64, gating: bool) {
        self.push(name, value, tolerance, "at_most", !gating);
    }
}
