//! Suite reports and their CSV/JSON forms.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::ExperimentConfig;
use crate::Error;

/// How a row's value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Relation::Le => value <= tolerance,
            Relation::Lt => value < tolerance,
            Relation::Ge => value >= tolerance,
            Relation::Gt => value > tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// One measured quantity. `value` is `None` when the check raised an error,
/// in which case `note` carries the message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub check_id: String,
    pub paper_anchor: String,
    #[serde(with = "real_opt")]
    pub value: Option<f64>,
    #[serde(with = "real")]
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Row {
    pub fn measured(id: String, anchor: &str, value: f64, relation: Relation, tolerance: f64) -> Self {
        Self {
            check_id: id,
            paper_anchor: anchor.to_string(),
            value: Some(value),
            tolerance,
            relation,
            pass: relation.holds(value, tolerance),
            note: String::new(),
        }
    }

    pub fn failed(id: String, anchor: &str, relation: Relation, tolerance: f64, error: impl fmt::Display) -> Self {
        Self {
            check_id: id,
            paper_anchor: anchor.to_string(),
            value: None,
            tolerance,
            relation,
            pass: false,
            note: error.to_string(),
        }
    }

    /// Recompute `pass` from the value, tolerance and relation.
    pub fn recheck(&self) -> bool {
        self.value.is_some_and(|v| self.relation.holds(v, self.tolerance))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub debug_assertions: bool,
    /// Seconds since the Unix epoch. The only field that varies between
    /// identical runs.
    pub timestamp: u64,
}

impl Environment {
    pub fn current() -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            debug_assertions: cfg!(debug_assertions),
            timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub rows: Vec<Row>,
    pub environment: Environment,
    pub config: ExperimentConfig,
}

impl SuiteReport {
    /// Rows are sorted by check id and `pass` is their conjunction.
    pub fn new(suite: impl Into<String>, mut rows: Vec<Row>, config: ExperimentConfig) -> Self {
        rows.sort_by(|a, b| a.check_id.cmp(&b.check_id));
        let pass = rows.iter().all(|r| r.pass);
        Self { suite: suite.into(), pass, rows, environment: Environment::current(), config }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check_id", "paper_anchor", "value", "tolerance", "pass"]).map_err(Error::csv)?;
        for r in &self.rows {
            let value = r.value.map(format_real).unwrap_or_default();
            w.write_record([&r.check_id, &r.paper_anchor, &value, &format_real(r.tolerance), &r.pass.to_string()])
                .map_err(Error::csv)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::Report(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Write `<dir>/<stem>.csv` or `<dir>/<stem>.json`, creating `dir`.
pub fn emit_report(report: &SuiteReport, format: Format, dir: &Path, stem: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), source: e })?;
    let (ext, body) = match format {
        Format::Csv => ("csv", report.to_csv()?),
        Format::Json => ("json", report.to_json()),
    };
    let path = dir.join(format!("{stem}.{ext}"));
    std::fs::write(&path, body).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    Ok(path)
}

/// Shortest round-trip decimal, with `inf`, `-inf` and `NaN` spelled out.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        _ => None,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Real {
    Number(f64),
    Word(String),
}

fn to_real(v: f64) -> Real {
    if v.is_finite() { Real::Number(v) } else { Real::Word(format_real(v)) }
}

fn from_real<E: serde::de::Error>(r: Real) -> Result<f64, E> {
    match r {
        Real::Number(v) => Ok(v),
        Real::Word(w) => parse_real(&w).ok_or_else(|| E::custom(format!("not a number: {w}"))),
    }
}

mod real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_real(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_real(Real::deserialize(d)?)
    }
}

mod real_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_real).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Real>::deserialize(d)?.map(from_real).transpose()
    }
}
