use std::collections::BTreeMap;

use serde::Serialize;

/// Per-node counters. Drops are counted, never raised.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeMetrics {
    /// Envelopes whose signature failed, or RA-only traffic from another key.
    pub forged: u64,
    /// Payloads that failed to decode or did not fit their topic.
    pub malformed: u64,
    /// Expired or superseded problems and blocks at or below the tip.
    pub stale: u64,
    /// Problems ignored because the local tip differs from the problem's parent.
    pub out_of_sync: u64,
    pub blocks_accepted: u64,
    pub blocks_rejected: u64,
    pub sync_responses_rejected: u64,
    pub txs_admitted: u64,
    pub txs_rejected: u64,
    /// Pending transactions an audit expected in a block but did not find.
    pub fee_audit_flags: u64,
    /// Old envelopes re-published by a replaying node.
    pub replays_sent: u64,
    /// Requests answered, keyed by requesting peer (hex prefix).
    pub requests_by_peer: BTreeMap<String, u64>,
}

impl NodeMetrics {
    pub fn count_request(&mut self, peer: &pouw_core::PublicKey) {
        *self.requests_by_peer.entry(peer.short()).or_default() += 1;
    }
}
