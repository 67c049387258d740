//! Named check results in the common report format.

use serde_json::Value;

use crate::json;
use crate::torus_field::TorusSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub check: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub value: Value,
    pub tolerance: f64,
    pub pass: bool,
}

impl Report {
    pub fn new(check: &str, spec: TorusSpec, seed: u64, value: Value, tolerance: f64, pass: bool) -> Self {
        Report { check: check.to_string(), n: spec.n, k: spec.k, seed, value, tolerance, pass }
    }

    pub fn to_json(&self) -> Value {
        json::object(vec![
            ("check", Value::from(self.check.clone())),
            ("n", Value::from(self.n)),
            ("K", Value::from(self.k)),
            ("seed", Value::from(self.seed)),
            ("value", self.value.clone()),
            ("tolerance", json::num(self.tolerance)),
            ("pass", Value::from(self.pass)),
        ])
    }
}

pub fn reports_to_json(reports: &[Report]) -> Value {
    Value::Array(reports.iter().map(Report::to_json).collect())
}
