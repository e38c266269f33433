//! Lossy delivery with per-recipient latency, plus traffic accounting.

use std::collections::BTreeMap;

use serde::Serialize;

use pouw_core::Rng64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TopicStats {
    pub sent: u64,
    pub dropped: u64,
    pub bytes: u64,
}

/// A delivery the bus decided to make.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheduled {
    pub to: usize,
    pub at_ms: u64,
}

#[derive(Debug, Clone)]
pub struct Bus {
    latency: (u64, u64),
    drop_rate: f64,
    latency_rng: Rng64,
    drop_rng: Rng64,
    stats: BTreeMap<&'static str, TopicStats>,
}

impl Bus {
    pub fn new(latency: (u64, u64), drop_rate: f64, latency_rng: Rng64, drop_rng: Rng64) -> Self {
        Self {
            latency,
            drop_rate,
            latency_rng,
            drop_rng,
            stats: BTreeMap::new(),
        }
    }

    /// Schedule `wire_len` bytes to each recipient. Each copy draws its own
    /// latency and is dropped independently.
    pub fn deliver(
        &mut self,
        now_ms: u64,
        topic: &'static str,
        wire_len: usize,
        recipients: impl IntoIterator<Item = usize>,
    ) -> Vec<Scheduled> {
        let mut out = Vec::new();
        for to in recipients {
            let stats = self.stats.entry(topic).or_default();
            stats.sent += 1;
            let delay = self.latency_rng.range_inclusive(self.latency.0, self.latency.1);
            if self.drop_rng.chance(self.drop_rate) {
                stats.dropped += 1;
                continue;
            }
            stats.bytes += wire_len as u64;
            out.push(Scheduled { to, at_ms: now_ms + delay });
        }
        out
    }

    pub fn stats(&self) -> &BTreeMap<&'static str, TopicStats> {
        &self.stats
    }

    pub fn bytes_transferred(&self) -> u64 {
        self.stats.values().map(|s| s.bytes).sum()
    }
}
