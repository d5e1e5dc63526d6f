//! Minimal blocking text-over-HTTP helpers shared by the scan client and
//! the factory's remote decoder.

use std::time::Duration;

use ureq::Agent;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct HttpError(String);

fn agent(timeout: Duration) -> Agent {
    Agent::config_builder().http_status_as_error(false).timeout_global(Some(timeout)).build().into()
}

/// POSTs a `text/plain` body and returns the status and reply text,
/// whatever the status.
pub fn post_text(url: &str, body: &str, timeout: Duration) -> Result<(u16, String), HttpError> {
    let mut resp = agent(timeout)
        .post(url)
        .content_type("text/plain; charset=utf-8")
        .send(body)
        .map_err(|e| HttpError(e.to_string()))?;
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().map_err(|e| HttpError(e.to_string()))?;
    Ok((status, text))
}

pub fn get_text(url: &str, timeout: Duration) -> Result<(u16, String), HttpError> {
    let mut resp = agent(timeout).get(url).call().map_err(|e| HttpError(e.to_string()))?;
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().map_err(|e| HttpError(e.to_string()))?;
    Ok((status, text))
}
