//! Minimal client for a Bugzilla-style REST endpoint (`GET <base>/rest/bug`).
//!
//! Fetched reports carry no intention or label; they are meant to be written
//! out with [`super::write_annotation_csv`] and labeled by hand.

use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use super::UnlabeledReport;

pub const URL_ENV: &str = "BUGTRIAGE_TRACKER_URL";
pub const TOKEN_ENV: &str = "BUGTRIAGE_TRACKER_TOKEN";

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("transport error contacting {url}: {message}")]
    Transport { url: String, message: String },

    #[error("tracker returned HTTP {status} for {url}")]
    Status { url: String, status: u16 },

    #[error("malformed tracker payload: {0}")]
    MalformedPayload(String),

    #[error("invalid tracker query: {0}")]
    InvalidQuery(String),
}

impl TrackerError {
    /// Whether repeating the same request may succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            TrackerError::Transport { .. } => true,
            TrackerError::Status { status, .. } => *status == 429 || *status >= 500,
            TrackerError::MalformedPayload(_) | TrackerError::InvalidQuery(_) => false,
        }
    }
}

/// Filter sent as query parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackerQuery {
    pub statuses: Vec<String>,
    pub resolutions: Vec<String>,
    pub product: Option<String>,
    pub limit: Option<usize>,
}

impl Default for TrackerQuery {
    /// Resolved or verified reports with resolution FIXED.
    fn default() -> Self {
        TrackerQuery {
            statuses: vec!["RESOLVED".into(), "VERIFIED".into()],
            resolutions: vec!["FIXED".into()],
            product: None,
            limit: None,
        }
    }
}

#[derive(Deserialize)]
struct Payload {
    bugs: Vec<RawBug>,
}

#[derive(Deserialize)]
struct RawBug {
    id: serde_json::Value,
    product: String,
    component: String,
    #[serde(alias = "reporter")]
    creator: String,
    severity: String,
    summary: String,
}

const INCLUDE_FIELDS: &str = "id,product,component,creator,severity,summary";

pub fn fetch_tracker(
    base_url: &str,
    token: Option<&str>,
    query: &TrackerQuery,
) -> Result<Vec<UnlabeledReport>, TrackerError> {
    if query.statuses.is_empty() || query.resolutions.is_empty() {
        return Err(TrackerError::InvalidQuery(
            "at least one status and one resolution filter are required".into(),
        ));
    }
    let url = format!("{}/rest/bug", base_url.trim_end_matches('/'));
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(60)))
        .http_status_as_error(false)
        .build()
        .into();
    let mut req = agent.get(&url);
    for s in &query.statuses {
        req = req.query("status", s);
    }
    for r in &query.resolutions {
        req = req.query("resolution", r);
    }
    if let Some(p) = &query.product {
        req = req.query("product", p);
    }
    if let Some(limit) = query.limit {
        req = req.query("limit", limit.to_string());
    }
    req = req.query("include_fields", INCLUDE_FIELDS);
    if let Some(t) = token {
        req = req.header("X-BUGZILLA-API-KEY", t);
    }

    let transport = |e: ureq::Error| TrackerError::Transport {
        url: url.clone(),
        message: e.to_string(),
    };
    let mut resp = req.call().map_err(transport)?;
    let status = resp.status().as_u16();
    if !(200..300).contains(&status) {
        return Err(TrackerError::Status { url, status });
    }
    let body = resp.body_mut().read_to_string().map_err(transport)?;
    parse_payload(&body)
}

pub(crate) fn parse_payload(body: &str) -> Result<Vec<UnlabeledReport>, TrackerError> {
    let payload: Payload = serde_json::from_str(body).map_err(|e| TrackerError::MalformedPayload(e.to_string()))?;
    payload
        .bugs
        .into_iter()
        .map(|b| {
            let id = match b.id {
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::String(s) => s,
                other => {
                    return Err(TrackerError::MalformedPayload(format!(
                        "bug id must be a number or string, got {other}"
                    )))
                }
            };
            Ok(UnlabeledReport {
                id,
                product: b.product,
                component: b.component,
                reporter: b.creator,
                severity: b.severity,
                summary: b.summary,
                intention: None,
            })
        })
        .collect()
}
