use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::FetchStatus;

/// Counts every search call, including retried attempts.
#[derive(Debug, Default)]
pub struct RequestLedger {
    requests: AtomicU64,
    failed: AtomicU64,
}

impl RequestLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, ok: bool) {
        self.requests.fetch_add(1, Ordering::Relaxed);
        if !ok {
            self.failed.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn total(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    pub fn failed(&self) -> u64 {
        self.failed.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Default)]
pub struct FetchLedger {
    attempts: AtomicU64,
    success: AtomicU64,
    http_error: AtomicU64,
    blocked: AtomicU64,
    timeout: AtomicU64,
    unparsable: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchLedgerSnapshot {
    pub attempts: u64,
    pub success: u64,
    pub http_error: u64,
    pub blocked: u64,
    pub timeout: u64,
    pub unparsable: u64,
}

impl FetchLedgerSnapshot {
    pub fn failures(&self) -> u64 {
        self.http_error + self.blocked + self.timeout + self.unparsable
    }

    pub fn record(&mut self, status: &FetchStatus) {
        self.attempts += 1;
        match status {
            FetchStatus::Success => self.success += 1,
            FetchStatus::HttpError { .. } => self.http_error += 1,
            FetchStatus::Blocked => self.blocked += 1,
            FetchStatus::Timeout => self.timeout += 1,
            FetchStatus::Unparsable => self.unparsable += 1,
        }
    }
}

impl FetchLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, status: &FetchStatus) {
        self.attempts.fetch_add(1, Ordering::Relaxed);
        let slot = match status {
            FetchStatus::Success => &self.success,
            FetchStatus::HttpError { .. } => &self.http_error,
            FetchStatus::Blocked => &self.blocked,
            FetchStatus::Timeout => &self.timeout,
            FetchStatus::Unparsable => &self.unparsable,
        };
        slot.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> FetchLedgerSnapshot {
        FetchLedgerSnapshot {
            attempts: self.attempts.load(Ordering::Relaxed),
            success: self.success.load(Ordering::Relaxed),
            http_error: self.http_error.load(Ordering::Relaxed),
            blocked: self.blocked.load(Ordering::Relaxed),
            timeout: self.timeout.load(Ordering::Relaxed),
            unparsable: self.unparsable.load(Ordering::Relaxed),
        }
    }
}
