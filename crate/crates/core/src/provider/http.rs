//! Wire protocol for remote providers: `POST <endpoint>` with
//! `{"input": {"TABLEID": "..."}}`, answered by a representation payload.

use std::time::Duration;

use serde::Serialize;
use url::Url;

use super::payload::RepresentationPayload;
use super::InputBinding;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(5000);

#[derive(Debug, Serialize)]
pub struct ProviderRequest<'a> {
    pub input: &'a InputBinding,
}

#[derive(Debug)]
pub(crate) enum HttpFailure {
    Unavailable(String),
    InvalidPayload(String),
}

#[derive(Debug, Clone)]
pub(crate) struct HttpBackend {
    client: reqwest::Client,
    base: Option<Url>,
}

impl HttpBackend {
    pub(crate) fn new(base: Option<Url>, timeout: Duration) -> Self {
        let base = base.map(|mut url| {
            if !url.path().ends_with('/') {
                let path = format!("{}/", url.path());
                url.set_path(&path);
            }
            url
        });
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .connect_timeout(timeout)
            .build()
            .expect("HTTP client configuration is static");
        HttpBackend { client, base }
    }

    pub(crate) fn resolve(&self, endpoint: &str) -> Result<Url, HttpFailure> {
        if let Ok(url) = Url::parse(endpoint) {
            return Ok(url);
        }
        let base = self
            .base
            .as_ref()
            .ok_or_else(|| HttpFailure::Unavailable(format!("no provider base URL configured for \"{endpoint}\"")))?;
        base.join(endpoint.trim_start_matches('/'))
            .map_err(|e| HttpFailure::Unavailable(format!("bad endpoint \"{endpoint}\": {e}")))
    }

    pub(crate) async fn post(
        &self,
        endpoint: &str,
        binding: &InputBinding,
    ) -> Result<RepresentationPayload, HttpFailure> {
        let url = self.resolve(endpoint)?;
        tracing::debug!(%url, "fetching provider");
        let response = self
            .client
            .post(url)
            .json(&ProviderRequest { input: binding })
            .send()
            .await
            .map_err(|e| HttpFailure::Unavailable(describe(&e)))?;
        let status = response.status();
        if !status.is_success() {
            return Err(HttpFailure::Unavailable(format!("provider answered {status}")));
        }
        let body = response.bytes().await.map_err(|e| HttpFailure::Unavailable(describe(&e)))?;
        serde_json::from_slice(&body).map_err(|e| HttpFailure::InvalidPayload(e.to_string()))
    }
}

fn describe(err: &reqwest::Error) -> String {
    if err.is_timeout() {
        "request timed out".to_string()
    } else {
        err.to_string()
    }
}
