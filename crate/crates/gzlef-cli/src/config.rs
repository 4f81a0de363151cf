use std::fmt;
use std::sync::Arc;

use gzlef::{FiniteGroup, GroupSpec};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything that determines a run. Embedded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub group: String,
    pub window: Option<i64>,
    pub thresholds: Vec<String>,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Format,
    pub state_cap: u64,
    pub memory_cap: Option<u64>,
    pub time_budget_secs: Option<u64>,
}

impl RunConfig {
    pub fn group_spec(&self) -> Result<GroupSpec, Failure> {
        GroupSpec::parse(&self.group).map_err(Failure::from_lib)
    }

    pub fn load_group(&self) -> Result<(GroupSpec, Arc<FiniteGroup>), Failure> {
        let spec = self.group_spec()?;
        let g = spec.generate().map_err(Failure::from_lib)?;
        Ok((spec, Arc::new(g)))
    }
}

/// Why a command could not produce a report.
#[derive(Debug)]
pub enum Failure {
    Input { message: String, line: Option<usize>, column: Option<usize> },
    Cap { cap: String, message: String },
    Library(gzlef::Error),
    Io(String),
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Failure {
        Failure::Input { message: message.into(), line: None, column: None }
    }

    pub fn from_json(what: &str, e: serde_json::Error) -> Failure {
        Failure::Input { message: format!("{}: {}", what, e), line: Some(e.line()), column: Some(e.column()) }
    }

    pub fn from_lib(e: gzlef::Error) -> Failure {
        match e {
            gzlef::Error::StateCap { .. } => Failure::Cap { cap: "state_cap".into(), message: e.to_string() },
            gzlef::Error::SizeCap { .. } => Failure::Cap { cap: "group_size_cap".into(), message: e.to_string() },
            gzlef::Error::Parse(m) => Failure::input(m),
            other => Failure::Library(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input { .. } | Failure::Library(_) => 2,
            Failure::Cap { .. } => 3,
            Failure::Io(_) => 4,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Failure::Input { message, line, column } => {
                json!({"error": {"kind": "input", "message": message, "line": line, "column": column}})
            }
            Failure::Cap { cap, message } => json!({"error": {"kind": "cap", "cap": cap, "message": message}}),
            Failure::Library(e) => json!({"error": {"kind": "invalid", "message": e.to_string()}}),
            Failure::Io(m) => json!({"error": {"kind": "io", "message": m}}),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Inline JSON, or a path to a file holding it.
pub fn read_json(what: &str, arg: &str) -> Result<Value, Failure> {
    let t = arg.trim_start();
    let text = if t.starts_with('{') || t.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::input(format!("{}: cannot read {:?}: {}", what, arg, e)))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::from_json(what, e))
}

/// A document plus whether every check in it passed.
pub struct Output {
    pub doc: Value,
    pub passed: bool,
    pub csv: Option<String>,
}

impl Output {
    pub fn new(cfg: &RunConfig, spec: Option<&GroupSpec>, body: Value, passed: bool) -> Output {
        let mut doc = json!({
            "config": cfg,
            "group_hash": spec.map(|s| s.content_hash()),
            "passed": passed,
        });
        if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
            d.extend(b);
        }
        Output { doc, passed, csv: None }
    }

    pub fn with_csv(mut self, csv: String) -> Output {
        self.csv = Some(csv);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match (format, &self.csv) {
            (Format::Csv, Some(c)) => c.clone(),
            _ => serde_json::to_string_pretty(&self.doc).expect("report serializes") + "\n",
        }
    }
}
