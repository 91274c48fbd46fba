//! Blocking HTTP connector: one request per call, flat JSON object in and out.

use std::time::Duration;

use super::ConnectorError;
use crate::grounding::SyntacticMessage;

#[derive(Debug, Default, Clone)]
pub struct HttpConnector;

impl HttpConnector {
    /// `POST`/`PUT` send the message as a JSON body; `GET` sends it as query
    /// parameters.
    pub fn invoke(
        &self,
        url: &str,
        method: &str,
        msg: &SyntacticMessage,
        timeout: Duration,
    ) -> Result<SyntacticMessage, ConnectorError> {
        if timeout.is_zero() {
            return Err(ConnectorError::Timeout);
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let result = match method.to_ascii_uppercase().as_str() {
            "POST" => agent
                .post(url)
                .header("content-type", "application/json")
                .send(msg.to_json()),
            "PUT" => agent
                .put(url)
                .header("content-type", "application/json")
                .send(msg.to_json()),
            "GET" => agent.get(url).query_pairs(msg.iter()).call(),
            other => {
                return Err(ConnectorError::InvalidEndpoint(format!(
                    "unsupported method {other}"
                )))
            }
        };
        let mut response = result.map_err(map_error)?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(ConnectorError::Status(status));
        }
        let body = response.body_mut().read_to_string().map_err(map_error)?;
        SyntacticMessage::from_json(&body).map_err(ConnectorError::Malformed)
    }
}

fn map_error(e: ureq::Error) -> ConnectorError {
    match e {
        ureq::Error::Timeout(_) => ConnectorError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => ConnectorError::Timeout,
        ureq::Error::BadUri(u) => ConnectorError::InvalidEndpoint(u),
        other => ConnectorError::Transport(other.to_string()),
    }
}
