//! Wire format: one JSON object per line in each direction.
//!
//! Request: `{"id": 0, "series_id": "INDPRO", "window": [..], "horizons": [12, 24]}`
//! Response: `{"id": 0, "forecasts": {"12": 0.1, "24": 0.2}}`

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AdapterError;
use crate::forecasters::ForecastTask;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub series_id: String,
    pub window: Vec<f64>,
    pub horizons: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub forecasts: BTreeMap<usize, f64>,
}

/// Newline-terminated request line for a task.
pub fn render_request(id: u64, task: &ForecastTask) -> String {
    let req = Request {
        id,
        series_id: task.series_id.clone(),
        window: task.window.clone(),
        horizons: task.horizons.clone(),
    };
    let mut line = serde_json::to_string(&req).expect("request serializes");
    line.push('\n');
    line
}

pub fn parse_response(line: &str) -> Result<Response, AdapterError> {
    #[derive(Deserialize)]
    struct Wire {
        id: Option<u64>,
        forecasts: Option<BTreeMap<String, serde_json::Value>>,
    }
    let bad = |m: String| AdapterError::BadResponse(m);
    let wire: Wire = serde_json::from_str(line).map_err(|e| bad(format!("{e}: {line:.200}")))?;
    let id = wire.id.ok_or_else(|| bad("missing id".into()))?;
    let raw = wire
        .forecasts
        .ok_or_else(|| bad(format!("id {id}: missing forecasts")))?;
    let mut forecasts = BTreeMap::new();
    for (key, value) in raw {
        let horizon: usize = key
            .parse()
            .map_err(|_| bad(format!("id {id}: horizon key `{key}` is not an integer")))?;
        let v = value
            .as_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("id {id}: forecast for {key} is not a finite number")))?;
        forecasts.insert(horizon, v);
    }
    Ok(Response { id, forecasts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_line_shape() {
        let task = ForecastTask::new("RPI", 5, vec![1.0, 2.5], vec![12, 24]).unwrap();
        assert_eq!(
            render_request(7, &task),
            "{\"id\":7,\"series_id\":\"RPI\",\"window\":[1.0,2.5],\"horizons\":[12,24]}\n"
        );
    }

    #[test]
    fn parses_responses() {
        let r = parse_response(r#"{"id": 3, "forecasts": {"12": 1.5, "24": -2}}"#).unwrap();
        assert_eq!(r.id, 3);
        assert_eq!(r.forecasts, BTreeMap::from([(12, 1.5), (24, -2.0)]));
    }

    #[test]
    fn rejects_malformed_responses() {
        for line in [
            "not json",
            r#"{"forecasts": {"12": 1}}"#,
            r#"{"id": 1}"#,
            r#"{"id": 1, "forecasts": {"12": "abc"}}"#,
            r#"{"id": 1, "forecasts": {"x": 1}}"#,
            r#"{"id": 1, "forecasts": {"12": null}}"#,
            r#"{"id": -1, "forecasts": {}}"#,
        ] {
            assert!(
                matches!(parse_response(line), Err(AdapterError::BadResponse(_))),
                "{line}"
            );
        }
    }
}
