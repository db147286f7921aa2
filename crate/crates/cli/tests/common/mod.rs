#![allow(dead_code)]

use gaplab_cli::{ExperimentConfig, ResultRecord};
use serde_json::Value;

pub fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

/// Largest relative difference between numeric leaves of two JSON trees,
/// or `None` when the trees differ in shape or in a non-numeric leaf.
pub fn max_numeric_diff(a: &Value, b: &Value) -> Option<f64> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64()?, y.as_f64()?);
            let scale = x.abs().max(y.abs()).max(1.0);
            Some((x - y).abs() / scale)
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            x.iter().zip(y).try_fold(0.0f64, |m, (p, q)| Some(m.max(max_numeric_diff(p, q)?)))
        }
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => x.iter().try_fold(0.0f64, |m, (k, p)| {
            Some(m.max(max_numeric_diff(p, y.get(k)?)?))
        }),
        _ if a == b => Some(0.0),
        _ => None,
    }
}

/// Difference between two records with timing fields dropped.
pub fn record_diff(a: &ResultRecord, b: &ResultRecord) -> Option<f64> {
    let a = serde_json::to_value(a.without_timings()).unwrap();
    let b = serde_json::to_value(b.without_timings()).unwrap();
    max_numeric_diff(&a, &b)
}
