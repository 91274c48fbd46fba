//! Deterministic in-process services backed by request/response tables.
//!
//! Table file format:
//!
//! ```json
//! { "name": "stockquote",
//!   "handlers": [ { "request": {"symbol": "SAP"}, "response": {"price": "150.0"} } ],
//!   "failures": [ {"symbol": "XXX"} ] }
//! ```
//!
//! A file may also hold an array of such objects.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::ConnectorError;
use crate::grounding::SyntacticMessage;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MockService {
    pub name: String,
    pub handlers: BTreeMap<SyntacticMessage, SyntacticMessage>,
    pub failures: BTreeSet<SyntacticMessage>,
}

impl MockService {
    pub fn new(name: impl Into<String>) -> Self {
        MockService {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn handler(mut self, request: SyntacticMessage, response: SyntacticMessage) -> Self {
        self.handlers.insert(request, response);
        self
    }

    pub fn failure(mut self, request: SyntacticMessage) -> Self {
        self.failures.insert(request);
        self
    }

    fn respond(&self, msg: &SyntacticMessage) -> Result<SyntacticMessage, ConnectorError> {
        if self.failures.contains(msg) {
            return Err(ConnectorError::ServiceFailure(msg.to_json()));
        }
        self.handlers
            .get(msg)
            .cloned()
            .ok_or_else(|| ConnectorError::NoHandler(msg.to_json()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMock {
    name: String,
    #[serde(default)]
    handlers: Vec<RawHandler>,
    #[serde(default)]
    failures: Vec<SyntacticMessage>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHandler {
    request: SyntacticMessage,
    response: SyntacticMessage,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawMockFile {
    One(RawMock),
    Many(Vec<RawMock>),
}

/// Parsed mock table file.
pub struct MockFile;

impl MockFile {
    pub fn parse(text: &str) -> Result<Vec<MockService>, String> {
        let raw: RawMockFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let raws = match raw {
            RawMockFile::One(m) => vec![m],
            RawMockFile::Many(ms) => ms,
        };
        Ok(raws
            .into_iter()
            .map(|m| MockService {
                name: m.name,
                handlers: m
                    .handlers
                    .into_iter()
                    .map(|h| (h.request, h.response))
                    .collect(),
                failures: m.failures.into_iter().collect(),
            })
            .collect())
    }
}

#[derive(Debug, Default)]
pub struct MockRegistry {
    services: IndexMap<String, MockService>,
}

impl MockRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, m: MockService) -> Result<(), ConnectorError> {
        if self.services.contains_key(&m.name) {
            return Err(ConnectorError::InvalidEndpoint(format!(
                "mock {:?} is already registered",
                m.name
            )));
        }
        self.services.insert(m.name.clone(), m);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.services.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.services.keys().map(String::as_str)
    }

    pub fn invoke(
        &self,
        name: &str,
        msg: &SyntacticMessage,
    ) -> Result<SyntacticMessage, ConnectorError> {
        self.services
            .get(name)
            .ok_or_else(|| ConnectorError::UnknownService(name.to_string()))?
            .respond(msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sap() -> SyntacticMessage {
        SyntacticMessage::new().with("symbol", "SAP")
    }

    fn stockquote() -> MockService {
        MockService::new("stockquote")
            .handler(sap(), SyntacticMessage::new().with("price", "150.0"))
            .failure(SyntacticMessage::new().with("symbol", "XXX"))
    }

    #[test]
    fn register_and_invoke() {
        let mut reg = MockRegistry::new();
        reg.register(stockquote()).unwrap();
        assert_eq!(
            reg.invoke("stockquote", &sap()).unwrap().get("price"),
            Some("150.0")
        );
        assert!(reg.register(stockquote()).is_err());
        assert!(matches!(
            reg.invoke("stockquote", &SyntacticMessage::new().with("symbol", "IBM")),
            Err(ConnectorError::NoHandler(_))
        ));
        assert!(matches!(
            reg.invoke("stockquote", &SyntacticMessage::new().with("symbol", "XXX")),
            Err(ConnectorError::ServiceFailure(_))
        ));
        assert!(matches!(
            reg.invoke("other", &sap()),
            Err(ConnectorError::UnknownService(_))
        ));
    }

    #[test]
    fn lookup_ignores_field_order() {
        let req = SyntacticMessage::new().with("b", "2").with("a", "1");
        let mut reg = MockRegistry::new();
        reg.register(MockService::new("m").handler(req, SyntacticMessage::new().with("ok", "y")))
            .unwrap();
        let parsed = SyntacticMessage::from_json(r#"{"a":"1","b":"2"}"#).unwrap();
        assert!(reg.invoke("m", &parsed).is_ok());
        // Values are compared exactly.
        let other = SyntacticMessage::from_json(r#"{"a":"1 ","b":"2"}"#).unwrap();
        assert!(reg.invoke("m", &other).is_err());
    }

    #[test]
    fn repeated_invocations_are_identical() {
        let mut reg = MockRegistry::new();
        reg.register(stockquote()).unwrap();
        let first = reg.invoke("stockquote", &sap()).unwrap().to_json();
        for _ in 0..50 {
            assert_eq!(reg.invoke("stockquote", &sap()).unwrap().to_json(), first);
        }
    }

    #[test]
    fn file_format() {
        let one = MockFile::parse(
            r#"{"name":"q","handlers":[{"request":{"symbol":"SAP"},"response":{"price":"150.0"}}],"failures":[{"symbol":"XXX"}]}"#,
        )
        .unwrap();
        assert_eq!(one, vec![stockquote_named("q")]);
        let many = MockFile::parse(r#"[{"name":"a"},{"name":"b"}]"#).unwrap();
        assert_eq!(many.len(), 2);
        assert!(
            MockFile::parse(r#"{"name":"a","handlers":[{"request":{"x":1},"response":{}}]}"#)
                .is_err()
        );
    }

    fn stockquote_named(name: &str) -> MockService {
        MockService {
            name: name.into(),
            ..stockquote()
        }
    }
}
