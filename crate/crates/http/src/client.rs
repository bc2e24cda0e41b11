use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;

use edw_core::domain::OrgNumber;
use edw_core::registry::{normalize_financials, CompanyRecord, FinancialYear, RegistryError, RegistrySource};

/// Transport failures and 5xx answers are retried with doubling backoff;
/// everything else is final on the first answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(10),
        }
    }
}

/// Registry client for the mock registry's wire contract.
///
/// Uses a blocking HTTP client: call it from plain threads or from
/// `spawn_blocking`, never directly on an async executor.
#[derive(Debug, Clone)]
pub struct HttpRegistryClient {
    base_url: String,
    http: Client,
    retry: RetryPolicy,
}

impl HttpRegistryClient {
    pub fn new(base_url: &str) -> Result<Self, RegistryError> {
        Self::with_retry(base_url, RetryPolicy::default())
    }

    pub fn with_retry(base_url: &str, retry: RetryPolicy) -> Result<Self, RegistryError> {
        if !(base_url.starts_with("http://") || base_url.starts_with("https://")) {
            return Err(RegistryError::Unavailable(format!("unsupported registry url {base_url:?}")));
        }
        let http = Client::builder()
            .timeout(retry.timeout)
            .build()
            .map_err(|e| RegistryError::Unavailable(e.to_string()))?;
        Ok(Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            http,
            retry,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn get<T: DeserializeOwned>(&self, org: &OrgNumber, suffix: &str) -> Result<T, RegistryError> {
        let url = format!("{}/company/{org}{suffix}", self.base_url);
        let mut delay = self.retry.initial_backoff;
        let mut last = RegistryError::Unavailable(format!("{url}: no attempt made"));
        for attempt in 1..=self.retry.attempts.max(1) {
            match self.http.get(&url).send() {
                Ok(resp) if resp.status().is_success() => {
                    let body = resp
                        .bytes()
                        .map_err(|e| RegistryError::Unavailable(format!("{url}: {e}")))?;
                    return serde_json::from_slice(&body)
                        .map_err(|e| RegistryError::InvalidResponse(format!("{url}: {e}")));
                }
                Ok(resp) if resp.status() == StatusCode::NOT_FOUND => {
                    return Err(RegistryError::NotFound(org.clone()));
                }
                Ok(resp) if resp.status().is_server_error() => {
                    last = RegistryError::Unavailable(format!("{url}: HTTP {}", resp.status()));
                }
                Ok(resp) => {
                    return Err(RegistryError::InvalidResponse(format!("{url}: HTTP {}", resp.status())));
                }
                Err(e) => last = RegistryError::Unavailable(format!("{url}: {e}")),
            }
            if attempt < self.retry.attempts {
                log::warn!("registry attempt {attempt} failed ({last}), retrying in {delay:?}");
                thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(last)
    }
}

impl RegistrySource for HttpRegistryClient {
    fn fetch_company(&self, org: &OrgNumber) -> Result<CompanyRecord, RegistryError> {
        let company: CompanyRecord = self.get(org, "")?;
        company.validate().map_err(RegistryError::InvalidResponse)?;
        Ok(company)
    }

    fn fetch_financials(&self, org: &OrgNumber) -> Result<Vec<FinancialYear>, RegistryError> {
        let years: Vec<FinancialYear> = self.get(org, "/financials")?;
        Ok(normalize_financials(years))
    }
}
