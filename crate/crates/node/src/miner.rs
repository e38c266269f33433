use std::collections::BTreeSet;

use pouw_core::model::{Commitment, SignedProblem, Solution};
use pouw_core::worker::{solve_problem, Deviation};
use pouw_core::{Digest, Rng64};

use crate::message::{Message, SyncMessage, Topic};
use crate::node::{secs, Node, RoleState};
use crate::transport::Outbound;

/// Delays after commitment at which the solution is uploaded to the RA.
const UPLOAD_DELAYS_MS: [u64; 3] = [200, 3_000, 6_000];

#[derive(Debug)]
pub struct MinerState {
    pub(crate) deviation: Deviation,
    pub(crate) rng: Rng64,
    /// A problem for a tip we do not have yet.
    pub(crate) pending: Option<SignedProblem>,
    pub(crate) mined: BTreeSet<Digest>,
    pub(crate) uploads: Vec<Upload>,
}

#[derive(Debug, Clone)]
pub(crate) struct Upload {
    due_ms: u64,
    solution: Solution,
    commitment: Commitment,
}

impl MinerState {
    pub fn new(deviation: Deviation, rng: Rng64) -> Self {
        Self {
            deviation,
            rng,
            pending: None,
            mined: BTreeSet::new(),
            uploads: Vec::new(),
        }
    }

    pub fn mined_count(&self) -> usize {
        self.mined.len()
    }
}

impl Node {
    pub(crate) fn on_problem(&mut self, sp: SignedProblem, now_ms: u64) -> Vec<Outbound> {
        if !matches!(self.role, RoleState::Miner(_)) {
            return Vec::new();
        }
        let p = &sp.problem;
        let id = p.id();
        let tip = self.tip();
        let RoleState::Miner(m) = &mut self.role else { unreachable!() };
        if m.mined.contains(&id) || secs(now_ms) >= p.expires_at || p.published_at < tip.block_time {
            self.metrics.stale += 1;
            return Vec::new();
        }
        if p.prev_block_hash != tip.hash() {
            if self.chain.contains(&p.prev_block_hash) {
                // built on a block we already moved past
                self.metrics.stale += 1;
                return Vec::new();
            }
            self.metrics.out_of_sync += 1;
            m.pending = Some(sp);
            return self.request_sync(now_ms);
        }
        if !p.is_well_formed() {
            self.metrics.malformed += 1;
            return Vec::new();
        }
        m.mined.insert(id);
        m.pending = None;
        let me = self.key.public();
        let solution = solve_problem(p, me, &m.deviation, &mut m.rng);
        let commitment = solution.commitment();
        let deadline_ms = p.expires_at * 1000;
        let mut out = Vec::new();
        for delay in UPLOAD_DELAYS_MS {
            let due_ms = now_ms + delay;
            if due_ms < deadline_ms {
                m.uploads.push(Upload {
                    due_ms,
                    solution: solution.clone(),
                    commitment,
                });
                out.push(Outbound::WakeAt(due_ms));
            }
        }
        self.commitments_seen.entry(id).or_default().insert(me, commitment);
        out.push(Outbound::Publish(self.envelope(Topic::MinerCommitment, Message::Commitment(commitment))));
        out
    }

    pub(crate) fn miner_timer(&mut self, now_ms: u64) -> Vec<Outbound> {
        let RoleState::Miner(m) = &mut self.role else {
            return Vec::new();
        };
        let (due, later): (Vec<Upload>, Vec<Upload>) = m.uploads.drain(..).partition(|u| u.due_ms <= now_ms);
        m.uploads = later;
        let ra = self.cfg.ra;
        let mut out = Vec::new();
        for u in due {
            // commitments ride along in case the first one was lost
            out.push(Outbound::Publish(self.envelope(Topic::MinerCommitment, Message::Commitment(u.commitment))));
            out.push(self.direct(ra, SyncMessage::SolutionUpload(u.solution)));
        }
        out
    }

    pub(crate) fn retry_pending_problem(&mut self, now_ms: u64) -> Vec<Outbound> {
        let tip_hash = self.tip_hash();
        let RoleState::Miner(m) = &mut self.role else {
            return Vec::new();
        };
        match m.pending.take() {
            Some(sp) if sp.problem.prev_block_hash == tip_hash => self.on_problem(sp, now_ms),
            other => {
                m.pending = other;
                Vec::new()
            }
        }
    }
}
