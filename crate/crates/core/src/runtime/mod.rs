//! Service connectors.
//!
//! [`Runtime`] dispatches an [`EndpointRef`] to the in-process mock registry or
//! to the HTTP connector. The resolution engine only sees the [`Connector`]
//! trait, so tests can plug in their own.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grounding::SyntacticMessage;

mod http;
mod mock;

pub use http::HttpConnector;
pub use mock::{MockFile, MockRegistry, MockService};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EndpointRef {
    Mock {
        name: String,
    },
    Http {
        url: String,
        #[serde(default = "default_method")]
        method: String,
    },
}

fn default_method() -> String {
    "POST".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnectorError {
    #[error("no handler for request {0}")]
    NoHandler(String),
    #[error("unknown mock service {0:?}")]
    UnknownService(String),
    #[error("service reported failure for request {0}")]
    ServiceFailure(String),
    #[error("timed out")]
    Timeout,
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid endpoint: {0}")]
    InvalidEndpoint(String),
}

pub trait Connector {
    fn invoke(
        &self,
        endpoint: &EndpointRef,
        msg: &SyntacticMessage,
        timeout: Duration,
    ) -> Result<SyntacticMessage, ConnectorError>;
}

#[derive(Debug, Default)]
pub struct Runtime {
    pub mocks: MockRegistry,
    pub http: HttpConnector,
}

impl Runtime {
    pub fn new() -> Runtime {
        Runtime::default()
    }
}

impl Connector for Runtime {
    fn invoke(
        &self,
        endpoint: &EndpointRef,
        msg: &SyntacticMessage,
        timeout: Duration,
    ) -> Result<SyntacticMessage, ConnectorError> {
        if timeout.is_zero() {
            return Err(ConnectorError::Timeout);
        }
        match endpoint {
            EndpointRef::Mock { name } => self.mocks.invoke(name, msg),
            EndpointRef::Http { url, method } => self.http.invoke(url, method, msg, timeout),
        }
    }
}
