//! Catch-up by hash list: ask peers for their chain, fetch the missing suffix
//! a few blocks at a time and stop trusting peers that serve bad data.

use std::collections::{BTreeMap, BTreeSet};

use pouw_core::{Digest, PublicKey};

use crate::message::{Message, SyncMessage, Topic};
use crate::node::Node;
use crate::transport::Outbound;

/// Minimum gap between on-demand hash-list requests.
const TRIGGER_GAP_MS: u64 = 500;

#[derive(Debug, Clone, Default)]
pub struct SyncState {
    pub(crate) peer_lists: BTreeMap<PublicKey, Vec<Digest>>,
    /// Requested block hash -> (peer, deadline).
    pub(crate) inflight: BTreeMap<Digest, (PublicKey, u64)>,
    pub(crate) failed: BTreeSet<(Digest, PublicKey)>,
    pub(crate) distrusted: BTreeSet<PublicKey>,
    pub(crate) next_periodic_ms: u64,
    pub(crate) last_trigger_ms: Option<u64>,
}

impl SyncState {
    pub(crate) fn distrust(&mut self, peer: PublicKey, hash: Digest) {
        self.failed.insert((hash, peer));
        self.distrusted.insert(peer);
        self.peer_lists.remove(&peer);
    }

    pub fn distrusted(&self) -> impl Iterator<Item = &PublicKey> {
        self.distrusted.iter()
    }
}

impl Node {
    pub fn distrusted_peers(&self) -> Vec<PublicKey> {
        self.sync.distrusted.iter().copied().collect()
    }

    fn hash_list_request(&self) -> Outbound {
        Outbound::Publish(self.envelope(Topic::ChainDb, Message::Sync(SyncMessage::RequestHashList)))
    }

    /// Ask peers for their hash lists now, unless asked very recently.
    pub fn request_sync(&mut self, now_ms: u64) -> Vec<Outbound> {
        if self.sync.last_trigger_ms.is_some_and(|t| now_ms < t + TRIGGER_GAP_MS) {
            return Vec::new();
        }
        self.sync.last_trigger_ms = Some(now_ms);
        vec![self.hash_list_request()]
    }

    pub(crate) fn sync_timer(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        if now_ms >= self.sync.next_periodic_ms {
            self.sync.last_trigger_ms = Some(now_ms);
            out.push(self.hash_list_request());
            self.sync.next_periodic_ms = now_ms + self.cfg.sync_interval_ms;
            out.push(Outbound::WakeAt(self.sync.next_periodic_ms));
        }
        let expired: Vec<(Digest, PublicKey)> = self
            .sync
            .inflight
            .iter()
            .filter(|(_, (_, deadline))| *deadline <= now_ms)
            .map(|(h, (p, _))| (*h, *p))
            .collect();
        if !expired.is_empty() {
            for (h, p) in expired {
                self.sync.inflight.remove(&h);
                self.sync.failed.insert((h, p));
            }
            out.extend(self.drive_sync(now_ms));
        }
        out
    }

    /// Hashes a peer holds beyond our tip, or nothing if its list does not
    /// contain our tip.
    fn missing_from(&self, list: &[Digest], tip: &Digest) -> Vec<Digest> {
        match list.iter().position(|h| h == tip) {
            Some(pos) => list[pos + 1..].to_vec(),
            None => Vec::new(),
        }
    }

    /// Fill the request window from the best peer lists.
    pub(crate) fn drive_sync(&mut self, now_ms: u64) -> Vec<Outbound> {
        if !self.sync.distrusted.is_empty() && self.sync.peer_lists.keys().all(|p| self.sync.distrusted.contains(p)) {
            // nobody left to ask: forgive and retry
            self.sync.distrusted.clear();
            self.sync.failed.clear();
        }
        let tip = self.tip_hash();
        let mut wanted: Vec<Digest> = Vec::new();
        for (peer, list) in &self.sync.peer_lists {
            if self.sync.distrusted.contains(peer) {
                continue;
            }
            let missing = self.missing_from(list, &tip);
            if missing.len() > wanted.len() {
                wanted = missing;
            }
        }
        let mut out = Vec::new();
        let headers_only = self.is_light();
        for hash in wanted {
            if self.sync.inflight.len() >= self.cfg.sync_window {
                break;
            }
            if self.chain.contains(&hash) || self.orphans.contains_key(&hash) || self.sync.inflight.contains_key(&hash) {
                continue;
            }
            let candidates: Vec<PublicKey> = self
                .sync
                .peer_lists
                .iter()
                .filter(|(p, l)| {
                    !self.sync.distrusted.contains(p) && !self.sync.failed.contains(&(hash, **p)) && l.contains(&hash)
                })
                .map(|(p, _)| *p)
                .collect();
            if candidates.is_empty() {
                // all holders failed this hash; let them try again next time
                self.sync.failed.retain(|(h, _)| *h != hash);
                continue;
            }
            let peer = candidates[self.rng.below(candidates.len() as u64) as usize];
            let deadline = now_ms + self.cfg.request_timeout_ms;
            self.sync.inflight.insert(hash, (peer, deadline));
            out.push(self.direct(peer, SyncMessage::RequestBlock { hash, headers_only }));
            out.push(Outbound::WakeAt(deadline));
        }
        out
    }
}
