use chrono::Utc;
use parking_lot::Mutex;

use crate::time::{truncate_to_second, Timestamp};

/// Source of append timestamps.
pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        truncate_to_second(Utc::now())
    }
}

/// A clock that only moves when told to. Used by tests and fixture generation.
#[derive(Debug)]
pub struct ManualClock(Mutex<Timestamp>);

impl ManualClock {
    pub fn new(start: Timestamp) -> Self {
        Self(Mutex::new(truncate_to_second(start)))
    }

    pub fn set(&self, ts: Timestamp) {
        *self.0.lock() = truncate_to_second(ts);
    }

    pub fn advance(&self, seconds: i64) {
        let mut guard = self.0.lock();
        *guard += chrono::Duration::seconds(seconds);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        *self.0.lock()
    }
}
