//! JSON verification reports.

use std::collections::BTreeMap;

use hharmonic::suites::Check;
use serde::Serialize;
use serde_json::value::RawValue;

pub const SCHEMA: u32 = 1;

/// A float written with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Float(pub f64);

impl Serialize for Float {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text = if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            "null".to_string()
        };
        RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub params: BTreeMap<String, Float>,
    pub error: Float,
    pub tol: Float,
    pub pass: bool,
    pub ms: Float,
}

impl From<&Check> for CheckRecord {
    fn from(c: &Check) -> Self {
        Self {
            id: c.id.clone(),
            params: c.params.iter().map(|(k, v)| (k.clone(), Float(*v))).collect(),
            error: Float(c.error),
            tol: Float(c.tol),
            pass: c.pass,
            ms: Float(c.ms),
        }
    }
}

/// Overall `pass` holds iff every record passes.
#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: String,
    pub version: &'static str,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(suite: &str, checks: &[Check]) -> Self {
        Self {
            schema: SCHEMA,
            suite: suite.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            checks: checks.iter().map(CheckRecord::from).collect(),
            pass: checks.iter().all(|c| c.pass),
        }
    }
}
