use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Scenario, ServiceRequest};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// On-disk document: `{ "version": 1, "scenario": {...}, "requests": [...] }`.
/// Either part may be absent so scenarios and request lists can live in
/// separate files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub requests: Vec<ServiceRequest>,
}

impl Document {
    pub fn new(scenario: Option<Scenario>, requests: Vec<ServiceRequest>) -> Self {
        Document {
            version: FORMAT_VERSION,
            scenario,
            requests,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: Document = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::parse(path, e.into_inner().to_string())
        })?;
        if doc.version != FORMAT_VERSION {
            return Err(Error::parse(
                "version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", doc.version),
            ));
        }
        if let Some(s) = &doc.scenario {
            s.validate()?;
            s.validate_requests(&doc.requests)?;
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization is infallible")
    }
}

pub fn write_document(doc: &Document, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, doc.to_json()).map_err(|e| Error::io(path, e))
}

pub fn read_document(path: impl AsRef<Path>) -> Result<Document> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Document::from_json(&text)
}

/// Writes a scenario together with its requests.
pub fn write_scenario(s: &Scenario, requests: &[ServiceRequest], path: impl AsRef<Path>) -> Result<()> {
    write_document(&Document::new(Some(s.clone()), requests.to_vec()), path)
}

/// Reads a document that must contain a scenario.
pub fn read_scenario(path: impl AsRef<Path>) -> Result<(Scenario, Vec<ServiceRequest>)> {
    let doc = read_document(path)?;
    let s = doc
        .scenario
        .ok_or_else(|| Error::parse("scenario", "missing field `scenario`"))?;
    Ok((s, doc.requests))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_grid_scenario, GridParams};

    fn doc_value() -> serde_json::Value {
        let s = generate_grid_scenario(&GridParams::desk(), 4).unwrap();
        serde_json::to_value(Document::new(Some(s), vec![])).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let s = generate_grid_scenario(&GridParams::desk(), 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        write_scenario(&s, &[], &path).unwrap();
        let (back, reqs) = read_scenario(&path).unwrap();
        assert_eq!(back, s);
        assert!(reqs.is_empty());
        assert_eq!(back.host_of(3), s.host_of(3));
    }

    #[test]
    fn negative_cpu_capacity_names_the_field() {
        let mut v = doc_value();
        v["scenario"]["hosts"][2]["cpu_capacity"] = serde_json::json!(-1.0);
        let err = Document::from_json(&v.to_string()).unwrap_err();
        match err {
            Error::Parse { field, .. } => assert_eq!(field, "scenario.hosts[2].cpu_capacity"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_backhaul_pair_is_rejected() {
        let mut v = doc_value();
        v["scenario"]["backhaul_capacity"][1][3] = serde_json::Value::Null;
        let err = Document::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field.contains("backhaul_capacity")));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut v = doc_value();
        v["version"] = serde_json::json!(2);
        let err = Document::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field == "version"));
    }

    #[test]
    fn wrong_type_reports_the_path() {
        let mut v = doc_value();
        v["scenario"]["base_stations"][0]["uplink_capacity"] = serde_json::json!("fast");
        let err = Document::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field.contains("uplink_capacity")));
    }
}
