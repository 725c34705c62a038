//! Travel-time matrix client for OpenRouteService-compatible endpoints.
//!
//! One POST per matrix: `{endpoint}/v2/matrix/{profile}` with the combined
//! location list and source/destination index lists. Durations come back in
//! seconds and are converted to minutes; null entries (unroutable pairs)
//! become +inf with a warning. Successful responses are cached in a local
//! file keyed by the request digest, so repeated runs are offline
//! reproducible.

use std::path::{Path, PathBuf};

use marketflow_core::{CostMatrix, CostUnit, GeoPoint};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable consulted when no API key is passed explicitly.
pub const API_KEY_ENV: &str = "MARKETFLOW_ORS_KEY";

/// A fetched travel-time matrix in minutes plus warnings about unroutable
/// pairs.
#[derive(Debug, Clone)]
pub struct TravelTimeMatrix {
    pub matrix: CostMatrix,
    pub warnings: Vec<String>,
}

pub struct OrsClient {
    endpoint: String,
    api_key: String,
    cache_dir: Option<PathBuf>,
}

impl OrsClient {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            cache_dir: None,
        }
    }

    /// Enables the content-addressed response cache under `dir`.
    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    fn request_body(origins: &[GeoPoint], destinations: &[GeoPoint]) -> Value {
        let locations: Vec<Value> = origins
            .iter()
            .chain(destinations)
            .map(|p| json!([p.lon(), p.lat()]))
            .collect();
        let sources: Vec<usize> = (0..origins.len()).collect();
        let targets: Vec<usize> = (origins.len()..origins.len() + destinations.len()).collect();
        json!({
            "locations": locations,
            "sources": sources,
            "destinations": targets,
            "metrics": ["duration"],
        })
    }

    /// Cache file for a request; the digest covers endpoint, profile, and
    /// body, never the API key.
    fn cache_path(&self, url: &str, body: &str) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let digest = Sha256::digest(format!("{url}\n{body}").as_bytes());
        Some(dir.join(format!("{}.json", hex::encode(digest))))
    }

    fn fetch_text(&self, url: &str, body: &str) -> Result<String, CliError> {
        let client = reqwest::blocking::Client::new();
        let response = client
            .post(url)
            .header("Authorization", &self.api_key)
            .header("Content-Type", "application/json")
            .body(body.to_string())
            .send()
            .map_err(|e| CliError::Io(format!("travel-time request to {url} failed: {e}")))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| CliError::Io(format!("cannot read travel-time response: {e}")))?;
        if !status.is_success() {
            let excerpt: String = text.chars().take(200).collect();
            return Err(CliError::Io(format!(
                "travel-time request failed with status {}: {excerpt}",
                status.as_u16()
            )));
        }
        Ok(text)
    }

    /// Fetches the I x J duration matrix, reading from the cache when the
    /// identical request was answered before.
    pub fn fetch_matrix(
        &self,
        origins: &[GeoPoint],
        destinations: &[GeoPoint],
        profile: &str,
    ) -> Result<TravelTimeMatrix, CliError> {
        if origins.is_empty() || destinations.is_empty() {
            return Err(CliError::Validation(
                "travel-time matrix needs at least one origin and one destination".into(),
            ));
        }
        let url = format!(
            "{}/v2/matrix/{profile}",
            self.endpoint.trim_end_matches('/')
        );
        let body = Self::request_body(origins, destinations).to_string();

        let cache_path = self.cache_path(&url, &body);
        let (text, fresh) = match &cache_path {
            Some(path) if path.exists() => {
                let cached = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read cache {}: {e}", path.display())))?;
                (cached, false)
            }
            _ => (self.fetch_text(&url, &body)?, true),
        };

        let parsed = parse_durations(&text, origins, destinations)?;
        if fresh {
            if let Some(path) = cache_path {
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| CliError::Io(format!("cannot create cache dir: {e}")))?;
                }
                std::fs::write(&path, &text)
                    .map_err(|e| CliError::Io(format!("cannot write cache {}: {e}", path.display())))?;
            }
        }
        Ok(parsed)
    }
}

/// Parses the `durations` field (seconds, null for unroutable) into minutes.
fn parse_durations(
    text: &str,
    origins: &[GeoPoint],
    destinations: &[GeoPoint],
) -> Result<TravelTimeMatrix, CliError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("malformed travel-time response: {e}")))?;
    let rows = root
        .get("durations")
        .and_then(Value::as_array)
        .ok_or_else(|| {
            CliError::Validation("travel-time response has no \"durations\" array".into())
        })?;
    if rows.len() != origins.len() {
        return Err(CliError::Validation(format!(
            "travel-time response has {} rows, expected {}",
            rows.len(),
            origins.len()
        )));
    }
    let mut minutes = Vec::with_capacity(origins.len() * destinations.len());
    let mut warnings = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| {
            CliError::Validation(format!("travel-time response row {i} is not an array"))
        })?;
        if row.len() != destinations.len() {
            return Err(CliError::Validation(format!(
                "travel-time response row {i} has {} entries, expected {}",
                row.len(),
                destinations.len()
            )));
        }
        for (j, entry) in row.iter().enumerate() {
            match entry {
                Value::Null => {
                    warnings.push(format!(
                        "no route between {} and {}; cost set to +inf",
                        origins[i].id(),
                        destinations[j].id()
                    ));
                    minutes.push(f64::INFINITY);
                }
                Value::Number(n) => {
                    let seconds = n.as_f64().ok_or_else(|| {
                        CliError::Validation(format!(
                            "travel-time entry ({i}, {j}) is not a finite number"
                        ))
                    })?;
                    if seconds < 0.0 {
                        return Err(CliError::Validation(format!(
                            "travel-time entry ({i}, {j}) is negative: {seconds}"
                        )));
                    }
                    minutes.push(seconds / 60.0);
                }
                other => {
                    return Err(CliError::Validation(format!(
                        "travel-time entry ({i}, {j}) is not a number: {other}"
                    )));
                }
            }
        }
    }
    let matrix = CostMatrix::new(
        origins.len(),
        destinations.len(),
        CostUnit::Minutes,
        minutes,
    )?;
    Ok(TravelTimeMatrix { matrix, warnings })
}
