//! Enumeration budget for exponential scans.
//!
//! Every public scan creates its own [`Meter`] from the process-wide limit,
//! so the limit applies per call.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_LIMIT: u64 = 1 << 20;

static LIMIT: AtomicU64 = AtomicU64::new(DEFAULT_LIMIT);

pub fn limit() -> u64 {
    LIMIT.load(Ordering::Relaxed)
}

pub fn set_limit(words: u64) {
    LIMIT.store(words.max(1), Ordering::Relaxed);
}

#[derive(Debug, Clone)]
pub struct Meter {
    used: u64,
    limit: u64,
}

impl Default for Meter {
    fn default() -> Self {
        Meter::new()
    }
}

impl Meter {
    pub fn new() -> Self {
        Meter::with_limit(limit())
    }

    pub fn with_limit(limit: u64) -> Self {
        Meter { used: 0, limit }
    }

    pub fn charge(&mut self, words: u64) -> Result<()> {
        self.used = self.used.saturating_add(words);
        if self.used > self.limit {
            Err(Error::Budget { limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// Charges for a full level of `2^n` words.
    pub fn charge_level(&mut self, n: usize) -> Result<()> {
        let words = if n >= 63 { u64::MAX } else { 1u64 << n };
        self.charge(words)
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meter_trips_past_limit() {
        let mut m = Meter::with_limit(10);
        assert!(m.charge(10).is_ok());
        assert_eq!(m.charge(1), Err(Error::Budget { limit: 10 }));
    }

    #[test]
    fn huge_levels_saturate() {
        let mut m = Meter::with_limit(u64::MAX - 1);
        assert!(m.charge_level(80).is_err());
    }
}
