use std::collections::BTreeMap;

use serde::Serialize;

use pouw_core::consensus::{
    assemble_block, issue_problem, pick_transactions, IdentityRegistry, RoundParams, RoundState,
};
use pouw_core::model::{Commitment, Solution};
use pouw_core::store::append_block;
use pouw_core::{Digest, PublicKey, Rng64};

use crate::message::{BlockAnnouncement, Message, Topic};
use crate::node::{secs, Node, RoleState};
use crate::transport::Outbound;

#[derive(Debug, Clone)]
pub struct AuthorityConfig {
    pub params: RoundParams,
    /// Problems to issue before going quiet.
    pub max_rounds: u64,
    /// Pause between a round closing and the next problem.
    pub issue_delay_ms: u64,
    pub rng_seed: u64,
}

/// What happened in one issued round.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub problem_id: Digest,
    pub published_at: u64,
    pub commitments: u64,
    pub solutions: u64,
    /// Rejected commitments and uploads, by reason.
    pub rejections: BTreeMap<String, u64>,
    /// Addresses with at least one rejected message, by reason.
    pub rejected_addresses: BTreeMap<String, Vec<PublicKey>>,
    pub stage1_eliminated: Vec<PublicKey>,
    pub outvoted: Vec<PublicKey>,
    pub uncommitted: Vec<PublicKey>,
    pub eligible: Vec<PublicKey>,
    pub accepted_digest: Option<Digest>,
    pub winner: Option<PublicKey>,
    pub block_id: Option<u64>,
    pub transactions: u64,
}

impl RoundRecord {
    fn reject(&mut self, reason: String, who: PublicKey) {
        *self.rejections.entry(reason.clone()).or_default() += 1;
        let list = self.rejected_addresses.entry(reason).or_default();
        if !list.contains(&who) {
            list.push(who);
            list.sort();
        }
    }
}

#[derive(Debug)]
pub struct AuthorityState {
    pub(crate) cfg: AuthorityConfig,
    pub(crate) registry: IdentityRegistry,
    pub(crate) ra_rng: Rng64,
    pub(crate) current: Option<(RoundState, RoundRecord)>,
    pub(crate) issued: u64,
    pub(crate) next_issue_ms: Option<u64>,
    pub(crate) records: Vec<RoundRecord>,
}

impl AuthorityState {
    pub fn new(cfg: AuthorityConfig) -> Self {
        Self {
            ra_rng: Rng64::new(cfg.rng_seed),
            cfg,
            registry: IdentityRegistry::new(),
            current: None,
            issued: 0,
            next_issue_ms: None,
            records: Vec::new(),
        }
    }

    pub fn registry(&self) -> &IdentityRegistry {
        &self.registry
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn issued(&self) -> u64 {
        self.issued
    }

    /// No round open and none left to issue.
    pub fn finished(&self) -> bool {
        self.current.is_none() && self.issued >= self.cfg.max_rounds
    }

    pub(crate) fn start(&mut self, now_ms: u64) -> Vec<Outbound> {
        let at = now_ms + self.cfg.issue_delay_ms;
        self.next_issue_ms = Some(at);
        vec![Outbound::WakeAt(at)]
    }

    pub(crate) fn accept_commitment(&mut self, c: Commitment, now: u64) {
        let Some((round, record)) = &mut self.current else {
            return;
        };
        match round.accept_commitment(&self.registry, c, now) {
            Ok(()) => record.commitments += 1,
            Err(e) => record.reject(format!("commitment: {e}"), c.miner),
        }
    }

    pub(crate) fn accept_solution(&mut self, s: Solution, now: u64) {
        let Some((round, record)) = &mut self.current else {
            return;
        };
        let miner = s.miner;
        match round.accept_solution(&self.registry, s, now) {
            Ok(()) => record.solutions += 1,
            Err(e) => record.reject(format!("solution: {e}"), miner),
        }
    }
}

impl Node {
    pub(crate) fn authority_timer(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        let expired = match &self.role {
            RoleState::Authority(a) => a.current.as_ref().is_some_and(|(r, _)| r.is_expired(secs(now_ms))),
            _ => return out,
        };
        if expired {
            out.extend(self.close_round(now_ms));
        }
        let RoleState::Authority(a) = &mut self.role else { unreachable!() };
        let due = a.current.is_none() && a.issued < a.cfg.max_rounds && a.next_issue_ms.is_some_and(|t| now_ms >= t);
        if due {
            out.extend(self.open_round(now_ms));
        }
        out
    }

    fn open_round(&mut self, now_ms: u64) -> Vec<Outbound> {
        let tip = self.tip();
        let RoleState::Authority(a) = &mut self.role else { unreachable!() };
        let (round, signed) = match issue_problem(&self.key, &tip, &a.cfg.params, secs(now_ms), &mut a.ra_rng) {
            Ok(r) => r,
            Err(_) => {
                // parameters cannot produce a problem; stop issuing
                a.next_issue_ms = None;
                return Vec::new();
            }
        };
        let record = RoundRecord {
            round: a.issued,
            problem_id: round.problem_id(),
            published_at: round.problem.published_at,
            ..RoundRecord::default()
        };
        let wake = round.problem.expires_at * 1000;
        a.issued += 1;
        a.next_issue_ms = None;
        a.current = Some((round, record));
        vec![
            Outbound::Publish(self.envelope(Topic::BlockProblem, Message::Problem(signed))),
            Outbound::WakeAt(wake),
        ]
    }

    fn close_round(&mut self, now_ms: u64) -> Vec<Outbound> {
        let RoleState::Authority(a) = &mut self.role else { unreachable!() };
        let Some((round, mut record)) = a.current.take() else {
            return Vec::new();
        };
        let next = now_ms + a.cfg.issue_delay_ms;
        a.next_issue_ms = Some(next);
        let mut out = vec![Outbound::WakeAt(next)];
        let verdict = round.conclude().unwrap_or_default();
        record.stage1_eliminated = verdict.stage1_eliminated.clone();
        record.outvoted = verdict.outvoted.clone();
        record.uncommitted = verdict.uncommitted.clone();
        record.eligible = verdict.eligible.clone();
        record.accepted_digest = verdict.accepted_digest;
        if let (Some(winner), Some(proof)) = (verdict.winner, verdict.proof) {
            if let Some(ann) = self.mint(&round, winner, proof, now_ms) {
                record.winner = Some(winner);
                record.block_id = Some(ann.block.block.header.block_id);
                record.transactions = ann.block.block.transactions.len() as u64;
                out.push(Outbound::Publish(self.envelope(Topic::BlockCreation, Message::Block(ann))));
            }
        }
        if let RoleState::Authority(a) = &mut self.role {
            a.records.push(record);
        }
        out
    }

    fn mint(
        &mut self,
        round: &RoundState,
        winner: PublicKey,
        proof: pouw_core::consensus::WinnerProof,
        now_ms: u64,
    ) -> Option<BlockAnnouncement> {
        let tip = self.tip();
        let state = self.state.as_mut()?;
        let txs = pick_transactions(&self.pool, state.world(), self.cfg.tx_cap);
        let signed =
            assemble_block(&self.key, &tip, state.world(), &round.problem, winner, txs, secs(now_ms)).ok()?;
        append_block(&mut self.chain, state, &signed.block).ok()?;
        let hash = signed.block.hash();
        self.chain.put_seal(&hash, &signed.signature).ok()?;
        self.hashes.push(hash);
        self.pool.remove_included(&signed.block.transactions);
        self.pool.prune(state.world());
        self.metrics.blocks_accepted += 1;
        Some(BlockAnnouncement { block: signed, proof })
    }
}
