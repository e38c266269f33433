use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use pouw_core::consensus::{fee_priority_violations, verify_winner, RegistrationError, TxPool};
use pouw_core::model::{
    validate_block_link, Block, BlockHeader, Commitment, LinkRules, TokenUnits, Transaction, DEFAULT_MAX_CLOCK_SKEW,
};
use pouw_core::store::{append_block, state_at, ChainStore, StateStore, StoreError, StoreMode, StoredBlock};
use pouw_core::worker::Deviation;
use pouw_core::{Digest, KeyPair, PublicKey, Rng64, Signature};
use pouw_core::state::WorldState;

use crate::authority::{AuthorityConfig, AuthorityState};
use crate::light::{light_verify_balance, light_verify_tx, prove_balance, prove_transaction, LightLog};
use crate::message::{BlockAnnouncement, Envelope, Message, SyncMessage, Topic};
use crate::metrics::NodeMetrics;
use crate::miner::MinerState;
use crate::sync::SyncState;
use crate::transport::Outbound;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NodeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("store holds a different genesis block")]
    GenesisMismatch,
}

/// Misbehaviour switched on for adversarial nodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Adversary {
    /// Periodically re-publish old transaction and problem envelopes verbatim.
    pub replay_old_envelopes: bool,
    /// Flip a bit in every block, transaction-proof and balance-proof response.
    pub tamper_responses: bool,
}

#[derive(Debug, Clone)]
pub struct NodeConfig {
    pub ra: PublicKey,
    pub genesis: Block,
    pub tx_cap: usize,
    pub sync_interval_ms: u64,
    pub request_timeout_ms: u64,
    /// Block requests kept in flight during sync.
    pub sync_window: usize,
    pub replay_interval_ms: u64,
    pub adversary: Adversary,
}

impl NodeConfig {
    pub fn new(ra: PublicKey, genesis: Block) -> Self {
        Self {
            ra,
            genesis,
            tx_cap: pouw_core::model::DEFAULT_TX_CAP,
            sync_interval_ms: 5_000,
            request_timeout_ms: 1_500,
            sync_window: 8,
            replay_interval_ms: 4_000,
            adversary: Adversary::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Role {
    Authority(AuthorityConfig),
    Miner(Deviation),
    Full,
    Light,
}

#[derive(Debug)]
pub(crate) enum RoleState {
    Authority(Box<AuthorityState>),
    Miner(Box<MinerState>),
    Full,
    Light,
}

#[derive(Debug)]
pub struct Node {
    pub(crate) key: KeyPair,
    pub(crate) cfg: NodeConfig,
    pub(crate) role: RoleState,
    pub(crate) chain: ChainStore,
    /// Chain hashes from genesis, kept in step with `chain`.
    pub(crate) hashes: Vec<Digest>,
    pub(crate) state: Option<StateStore>,
    pub(crate) pool: TxPool,
    /// Commitments seen on the commitment topic, by problem id.
    pub(crate) commitments_seen: BTreeMap<Digest, BTreeMap<PublicKey, Commitment>>,
    pub(crate) registered: BTreeSet<PublicKey>,
    pub(crate) sync: SyncState,
    /// Blocks (or headers) waiting for their parent, by hash.
    pub(crate) orphans: BTreeMap<Digest, (StoredBlock, Option<Signature>)>,
    /// Own transactions not yet on chain, by nonce.
    pub(crate) own_pending: BTreeMap<u64, Transaction>,
    pub(crate) replay_bank: Vec<Envelope>,
    pub(crate) next_replay_ms: u64,
    pub(crate) rng: Rng64,
    pub(crate) metrics: NodeMetrics,
    pub(crate) light_log: LightLog,
}

pub(crate) fn secs(now_ms: u64) -> u64 {
    now_ms / 1000
}

impl Node {
    /// Build a node on in-memory stores seeded with the genesis block.
    pub fn new(key: KeyPair, role: Role, cfg: NodeConfig, rng_seed: u64) -> Result<Self, NodeError> {
        let light = matches!(role, Role::Light);
        let mode = if light { StoreMode::Light } else { StoreMode::Full };
        let chain = ChainStore::open_memory(mode);
        let state = (!light).then(StateStore::open_memory);
        Self::with_stores(key, role, cfg, rng_seed, chain, state)
    }

    /// Build a node on caller-provided stores. Empty stores receive genesis;
    /// non-empty ones must start from the configured genesis.
    pub fn with_stores(
        key: KeyPair,
        role: Role,
        cfg: NodeConfig,
        rng_seed: u64,
        mut chain: ChainStore,
        mut state: Option<StateStore>,
    ) -> Result<Self, NodeError> {
        let genesis_hash = cfg.genesis.hash();
        match chain.latest()? {
            None => match state.as_mut() {
                Some(s) => append_block(&mut chain, s, &cfg.genesis)?,
                None => chain.append_header(&cfg.genesis.header)?,
            },
            Some(_) => {
                if chain.hash_list()?.first() != Some(&genesis_hash) {
                    return Err(NodeError::GenesisMismatch);
                }
            }
        }
        let hashes = chain.hash_list()?;
        let mut rng = Rng64::new(rng_seed);
        let role = match role {
            Role::Authority(c) => RoleState::Authority(Box::new(AuthorityState::new(c))),
            Role::Miner(d) => RoleState::Miner(Box::new(MinerState::new(d, Rng64::new(rng.next_u64())))),
            Role::Full => RoleState::Full,
            Role::Light => RoleState::Light,
        };
        Ok(Self {
            key,
            cfg,
            role,
            chain,
            hashes,
            state,
            pool: TxPool::new(),
            commitments_seen: BTreeMap::new(),
            registered: BTreeSet::new(),
            sync: SyncState::default(),
            orphans: BTreeMap::new(),
            own_pending: BTreeMap::new(),
            replay_bank: Vec::new(),
            next_replay_ms: 0,
            rng,
            metrics: NodeMetrics::default(),
            light_log: LightLog::default(),
        })
    }

    pub fn public(&self) -> PublicKey {
        self.key.public()
    }

    pub fn is_light(&self) -> bool {
        matches!(self.role, RoleState::Light)
    }

    pub fn is_authority(&self) -> bool {
        matches!(self.role, RoleState::Authority(_))
    }

    pub fn chain(&self) -> &ChainStore {
        &self.chain
    }

    pub fn world(&self) -> Option<&WorldState> {
        self.state.as_ref().map(StateStore::world)
    }

    pub fn pool(&self) -> &TxPool {
        &self.pool
    }

    pub fn metrics(&self) -> &NodeMetrics {
        &self.metrics
    }

    pub fn light_log(&self) -> &LightLog {
        &self.light_log
    }

    pub fn authority(&self) -> Option<&AuthorityState> {
        match &self.role {
            RoleState::Authority(a) => Some(a),
            _ => None,
        }
    }

    pub fn tip(&self) -> BlockHeader {
        self.chain
            .tip()
            .ok()
            .flatten()
            .unwrap_or_else(|| self.cfg.genesis.header.clone())
    }

    pub fn tip_hash(&self) -> Digest {
        self.tip().hash()
    }

    pub fn own_pending(&self) -> impl Iterator<Item = &Transaction> {
        self.own_pending.values()
    }

    /// Topics this node listens on, besides direct messages.
    pub fn subscriptions(&self) -> Vec<Topic> {
        match self.role {
            RoleState::Authority(_) => vec![Topic::ChainDb, Topic::Transactions, Topic::MinerCommitment],
            RoleState::Light => vec![Topic::BlockCreation],
            _ => vec![
                Topic::ChainDb,
                Topic::Transactions,
                Topic::BlockProblem,
                Topic::BlockCreation,
                Topic::MinerCommitment,
            ],
        }
    }

    pub(crate) fn envelope(&self, topic: Topic, message: Message) -> Envelope {
        Envelope::seal(&self.key, topic, &message)
    }

    pub(crate) fn direct(&self, to: PublicKey, message: SyncMessage) -> Outbound {
        Outbound::Direct {
            to,
            envelope: self.envelope(Topic::Direct, Message::Sync(message)),
        }
    }

    /// Arm the periodic timers.
    pub fn start(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        if !self.is_authority() {
            self.sync.next_periodic_ms = now_ms + self.cfg.sync_interval_ms;
            out.push(Outbound::WakeAt(self.sync.next_periodic_ms));
        }
        if self.cfg.adversary.replay_old_envelopes {
            self.next_replay_ms = now_ms + self.cfg.replay_interval_ms;
            out.push(Outbound::WakeAt(self.next_replay_ms));
        }
        if let RoleState::Authority(a) = &mut self.role {
            out.extend(a.start(now_ms));
        }
        out
    }

    /// Register `address` under `identity` (RA only) and announce the result.
    pub fn register_identity(
        &mut self,
        identity: &[u8],
        address: PublicKey,
    ) -> (Result<(), RegistrationError>, Vec<Outbound>) {
        let RoleState::Authority(a) = &mut self.role else {
            return (Ok(()), Vec::new());
        };
        match a.registry.register(&self.key, identity, address) {
            Ok(ann) => {
                let env = self.envelope(Topic::BlockProblem, Message::Registration(ann));
                (Ok(()), vec![Outbound::Publish(env)])
            }
            Err(e) => (Err(e), Vec::new()),
        }
    }

    pub fn handle_envelope(&mut self, env: &Envelope, now_ms: u64) -> Vec<Outbound> {
        if !env.verify() || (env.topic.ra_only() && env.sender != self.cfg.ra) {
            self.metrics.forged += 1;
            return Vec::new();
        }
        let msg = match env.open() {
            Ok(m) if m.fits(env.topic) => m,
            _ => {
                self.metrics.malformed += 1;
                return Vec::new();
            }
        };
        if self.cfg.adversary.replay_old_envelopes && matches!(env.topic, Topic::Transactions | Topic::BlockProblem) {
            self.replay_bank.push(env.clone());
        }
        match msg {
            Message::Transaction(tx) => {
                self.admit_transaction(tx, now_ms);
                Vec::new()
            }
            Message::Problem(sp) => {
                if !sp.verify(&self.cfg.ra) {
                    self.metrics.forged += 1;
                    return Vec::new();
                }
                self.on_problem(sp, now_ms)
            }
            Message::Registration(r) => {
                if r.verify(&self.cfg.ra) {
                    self.registered.insert(r.address);
                } else {
                    self.metrics.forged += 1;
                }
                Vec::new()
            }
            Message::Block(ann) => self.on_block_announcement(ann, now_ms),
            Message::Commitment(c) => {
                if env.sender != c.miner {
                    self.metrics.forged += 1;
                    return Vec::new();
                }
                self.on_commitment(c, now_ms);
                Vec::new()
            }
            Message::Sync(s) => self.on_sync(env.sender, s, now_ms),
        }
    }

    pub fn on_wake(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        if !self.is_authority() {
            out.extend(self.sync_timer(now_ms));
        }
        if self.cfg.adversary.replay_old_envelopes && now_ms >= self.next_replay_ms {
            out.extend(self.replay_some());
            self.next_replay_ms = now_ms + self.cfg.replay_interval_ms;
            out.push(Outbound::WakeAt(self.next_replay_ms));
        }
        out.extend(self.role_timer(now_ms));
        out
    }

    fn role_timer(&mut self, now_ms: u64) -> Vec<Outbound> {
        match &self.role {
            RoleState::Authority(_) => self.authority_timer(now_ms),
            RoleState::Miner(_) => self.miner_timer(now_ms),
            _ => Vec::new(),
        }
    }

    fn replay_some(&mut self) -> Vec<Outbound> {
        let mut out = Vec::new();
        if self.replay_bank.is_empty() {
            return out;
        }
        for _ in 0..3 {
            // prefer the older half so replays are genuinely stale
            let span = (self.replay_bank.len() as u64).div_ceil(2);
            let i = self.rng.below(span) as usize;
            out.push(Outbound::Publish(self.replay_bank[i].clone()));
            self.metrics.replays_sent += 1;
        }
        out
    }

    fn admit_transaction(&mut self, tx: Transaction, now_ms: u64) {
        let Some(state) = &self.state else {
            return;
        };
        let wallet = state.wallet(&tx.sender);
        match self.pool.admit(tx, &wallet, now_ms) {
            Ok(_) => self.metrics.txs_admitted += 1,
            Err(_) => self.metrics.txs_rejected += 1,
        }
    }

    fn on_commitment(&mut self, c: Commitment, now_ms: u64) {
        self.commitments_seen.entry(c.problem_id).or_default().entry(c.miner).or_insert(c);
        if let RoleState::Authority(a) = &mut self.role {
            a.accept_commitment(c, secs(now_ms));
        }
    }

    /// Sign and publish a transfer from this node's account. The nonce follows
    /// the chain nonce plus own transactions still pending.
    pub fn submit_transfer(&mut self, receiver: PublicKey, amount: TokenUnits, fee: TokenUnits, now_ms: u64) -> Vec<Outbound> {
        let Some(state) = &self.state else {
            return Vec::new();
        };
        let wallet = state.wallet(&self.public());
        let committed: u64 = self.own_pending.values().map(|t| t.amount.0 + t.fee.0).sum();
        if wallet.balance.0.saturating_sub(committed) < amount.0.saturating_add(fee.0) {
            return Vec::new();
        }
        let nonce = wallet.nonce + self.own_pending.len() as u64 + 1;
        let tx = Transaction::new_signed(&self.key, receiver, amount, fee, nonce);
        self.own_pending.insert(nonce, tx.clone());
        self.admit_transaction(tx.clone(), now_ms);
        vec![Outbound::Publish(self.envelope(Topic::Transactions, Message::Transaction(tx)))]
    }

    /// Ask `peer` for an inclusion proof (light nodes).
    pub fn request_tx_proof(&mut self, peer: PublicKey, tx_id: Digest, block_hash: Digest) -> Vec<Outbound> {
        self.light_log.tx_requests += 1;
        vec![self.direct(peer, SyncMessage::RequestTxProof { tx_id, block_hash })]
    }

    /// Ask `peer` for a balance proof (light nodes).
    pub fn request_balance(&mut self, peer: PublicKey, address: PublicKey, block_hash: Digest) -> Vec<Outbound> {
        self.light_log.balance_requests += 1;
        vec![self.direct(peer, SyncMessage::RequestBalance { address, block_hash })]
    }

    fn on_block_announcement(&mut self, ann: BlockAnnouncement, now_ms: u64) -> Vec<Outbound> {
        if !ann.block.verify(&self.cfg.ra) {
            self.metrics.forged += 1;
            return Vec::new();
        }
        let block = ann.block.block;
        let hash = block.hash();
        if self.chain.contains(&hash) || self.orphans.contains_key(&hash) {
            self.metrics.stale += 1;
            return Vec::new();
        }
        let tip = self.tip();
        let observed = self.commitments_seen.get(&block.header.problem_id);
        if verify_winner(&block.problem, &ann.proof, &block.header.block_winner, observed).is_err() {
            self.metrics.blocks_rejected += 1;
            return Vec::new();
        }
        if block.header.block_id <= tip.block_id {
            self.metrics.stale += 1;
            return Vec::new();
        }
        let stored = if self.is_light() {
            StoredBlock::HeaderOnly(block.header.clone())
        } else {
            StoredBlock::Full(block)
        };
        self.orphans.insert(hash, (stored, Some(ann.block.signature)));
        let mut out = self.connect_orphans(now_ms);
        if self.orphans.contains_key(&hash) {
            // parent missing: catch up
            out.extend(self.request_sync(now_ms));
        }
        out
    }

    /// Append every buffered block that extends the tip, in order.
    pub(crate) fn connect_orphans(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        loop {
            let tip = self.tip();
            let tip_hash = tip.hash();
            self.orphans.retain(|_, (b, _)| b.header().block_id > tip.block_id);
            let Some(next) = self
                .orphans
                .iter()
                .find(|(_, (b, _))| b.header().prev_block_hash == tip_hash)
                .map(|(h, _)| *h)
            else {
                return out;
            };
            let (stored, seal) = self.orphans.remove(&next).expect("present");
            if self.accept_block(&tip, stored, seal, now_ms) {
                out.extend(self.after_block(now_ms));
            }
        }
    }

    /// Validate `stored` against the tip and append it.
    fn accept_block(&mut self, tip: &BlockHeader, stored: StoredBlock, seal: Option<Signature>, now_ms: u64) -> bool {
        let hash = stored.hash();
        let rules = LinkRules {
            now: secs(now_ms),
            max_clock_skew: DEFAULT_MAX_CLOCK_SKEW,
            tx_cap: self.cfg.tx_cap,
        };
        let ok = match (&mut self.state, stored) {
            (Some(state), StoredBlock::Full(block)) => {
                let valid = validate_block_link(tip, &block, state.world(), &rules).is_ok();
                if valid {
                    let flags = fee_priority_violations(&self.pool, state.world(), self.cfg.tx_cap, &block.transactions);
                    self.metrics.fee_audit_flags += flags.len() as u64;
                }
                let ok = valid && append_block(&mut self.chain, state, &block).is_ok();
                if ok {
                    self.pool.remove_included(&block.transactions);
                    self.pool.prune(state.world());
                    let nonce = state.wallet(&self.key.public()).nonce;
                    self.own_pending.retain(|n, _| *n > nonce);
                }
                ok
            }
            (None, stored) => {
                let h = stored.header();
                let linked = h.prev_block_hash == tip.hash()
                    && h.block_id == tip.block_id + 1
                    && h.block_time > tip.block_time
                    && h.block_time <= rules.now.saturating_add(rules.max_clock_skew);
                linked && self.chain.append_header(h).is_ok()
            }
            (Some(_), StoredBlock::HeaderOnly(_)) => false,
        };
        if ok {
            if let Some(sig) = seal {
                let _ = self.chain.put_seal(&hash, &sig);
            }
            self.hashes.push(hash);
            self.metrics.blocks_accepted += 1;
        } else {
            self.metrics.blocks_rejected += 1;
        }
        ok
    }

    /// Hooks after the tip advanced.
    fn after_block(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out: Vec<Outbound> = self
            .own_pending
            .values()
            .map(|tx| Outbound::Publish(self.envelope(Topic::Transactions, Message::Transaction(tx.clone()))))
            .collect();
        if matches!(self.role, RoleState::Miner(_)) {
            out.extend(self.retry_pending_problem(now_ms));
        }
        out
    }

    fn on_sync(&mut self, peer: PublicKey, msg: SyncMessage, now_ms: u64) -> Vec<Outbound> {
        match msg {
            SyncMessage::RequestHashList => {
                if self.is_light() {
                    return Vec::new();
                }
                self.metrics.count_request(&peer);
                vec![self.direct(peer, SyncMessage::HashList(self.hashes.clone()))]
            }
            SyncMessage::HashList(list) => {
                self.sync.peer_lists.insert(peer, list);
                self.drive_sync(now_ms)
            }
            SyncMessage::RequestBlock { hash, headers_only } => {
                if self.is_light() {
                    return Vec::new();
                }
                self.metrics.count_request(&peer);
                let reply = match self.chain.get(&hash).ok().flatten() {
                    Some(stored) => {
                        let mut block = match (headers_only, stored) {
                            (true, s) => StoredBlock::HeaderOnly(s.header().clone()),
                            (false, s) => s,
                        };
                        if self.cfg.adversary.tamper_responses {
                            self.tamper_block(&mut block);
                        }
                        SyncMessage::BlockData {
                            requested: hash,
                            block,
                            seal: self.chain.seal(&hash).ok().flatten(),
                        }
                    }
                    None => SyncMessage::NotFound(hash),
                };
                vec![self.direct(peer, reply)]
            }
            SyncMessage::BlockData { requested, block, seal } => self.on_block_data(peer, requested, block, seal, now_ms),
            SyncMessage::RequestTxProof { tx_id, block_hash } => {
                if self.is_light() {
                    return Vec::new();
                }
                self.metrics.count_request(&peer);
                let found = self
                    .chain
                    .full_block(&block_hash)
                    .ok()
                    .flatten()
                    .and_then(|b| prove_transaction(&b, &tx_id));
                let reply = match found {
                    Some((mut tx, mut proof)) => {
                        if self.cfg.adversary.tamper_responses {
                            self.tamper_tx_proof(&mut tx, &mut proof);
                        }
                        SyncMessage::TxProof { block_hash, tx, proof }
                    }
                    None => SyncMessage::NotFound(tx_id),
                };
                vec![self.direct(peer, reply)]
            }
            SyncMessage::TxProof { block_hash, tx, proof } => {
                if self.is_light() {
                    let ok = light_verify_tx(&self.chain, &tx, &proof, &block_hash).is_ok();
                    self.light_log.record_tx(ok, block_hash, tx.id());
                }
                Vec::new()
            }
            SyncMessage::RequestBalance { address, block_hash } => {
                if self.is_light() {
                    return Vec::new();
                }
                self.metrics.count_request(&peer);
                let reply = match self.balance_proof(&address, &block_hash) {
                    Some((mut wallet, mut proof)) => {
                        if self.cfg.adversary.tamper_responses {
                            self.tamper_balance(&mut wallet, &mut proof);
                        }
                        SyncMessage::BalanceProof {
                            block_hash,
                            address,
                            wallet,
                            proof,
                        }
                    }
                    None => SyncMessage::NotFound(block_hash),
                };
                vec![self.direct(peer, reply)]
            }
            SyncMessage::BalanceProof {
                block_hash,
                address,
                wallet,
                proof,
            } => {
                if self.is_light() {
                    let ok = light_verify_balance(&self.chain, &address, &wallet, &proof, &block_hash).is_ok();
                    self.light_log.record_balance(ok, block_hash, address, wallet);
                }
                Vec::new()
            }
            SyncMessage::NotFound(h) => {
                if self.sync.inflight.get(&h).is_some_and(|(p, _)| *p == peer) {
                    self.sync.inflight.remove(&h);
                    self.sync.failed.insert((h, peer));
                    return self.drive_sync(now_ms);
                }
                if self.is_light() {
                    self.light_log.not_found += 1;
                }
                Vec::new()
            }
            SyncMessage::SolutionUpload(s) => {
                if peer != s.miner {
                    self.metrics.forged += 1;
                    return Vec::new();
                }
                if let RoleState::Authority(a) = &mut self.role {
                    a.accept_solution(s, secs(now_ms));
                }
                Vec::new()
            }
        }
    }

    fn balance_proof(
        &self,
        address: &PublicKey,
        block_hash: &Digest,
    ) -> Option<(pouw_core::model::Wallet, pouw_core::merkle::MerkleProof)> {
        let state = self.state.as_ref()?;
        if state.latest() == Some(*block_hash) {
            return prove_balance(state.world(), address);
        }
        let world = state_at(&self.chain, block_hash).ok()?;
        prove_balance(&world, address)
    }

    fn on_block_data(
        &mut self,
        peer: PublicKey,
        requested: Digest,
        block: StoredBlock,
        seal: Option<Signature>,
        now_ms: u64,
    ) -> Vec<Outbound> {
        if !self.sync.inflight.get(&requested).is_some_and(|(p, _)| *p == peer) {
            self.metrics.stale += 1;
            return Vec::new();
        }
        self.sync.inflight.remove(&requested);
        let hash = block.hash();
        let sealed = hash == self.cfg.genesis.hash()
            || seal.is_some_and(|s| self.cfg.ra.verify(hash.as_bytes(), &s));
        let shape_ok = self.is_light() || matches!(block, StoredBlock::Full(_));
        if hash != requested || !sealed || !shape_ok {
            self.metrics.sync_responses_rejected += 1;
            self.sync.distrust(peer, requested);
            return self.drive_sync(now_ms);
        }
        let block = match block {
            StoredBlock::Full(b) if self.is_light() => StoredBlock::HeaderOnly(b.header),
            b => b,
        };
        if !self.chain.contains(&hash) {
            self.orphans.insert(hash, (block, seal));
        }
        let mut out = self.connect_orphans(now_ms);
        out.extend(self.drive_sync(now_ms));
        out
    }

    fn tamper_block(&mut self, block: &mut StoredBlock) {
        let bit = self.rng.below(256) as usize;
        let h = match block {
            StoredBlock::Full(b) => &mut b.header,
            StoredBlock::HeaderOnly(h) => h,
        };
        h.state_merkle_root.0[bit / 8] ^= 1 << (bit % 8);
    }

    fn tamper_tx_proof(&mut self, tx: &mut Transaction, proof: &mut pouw_core::merkle::MerkleProof) {
        if proof.siblings.is_empty() || self.rng.chance(0.5) {
            tx.amount.0 ^= 1 << self.rng.below(64);
        } else {
            let i = self.rng.below(proof.siblings.len() as u64) as usize;
            let bit = self.rng.below(256) as usize;
            proof.siblings[i].0 .0[bit / 8] ^= 1 << (bit % 8);
        }
    }

    fn tamper_balance(&mut self, wallet: &mut pouw_core::model::Wallet, proof: &mut pouw_core::merkle::MerkleProof) {
        if proof.siblings.is_empty() || self.rng.chance(0.5) {
            wallet.balance.0 ^= 1 << self.rng.below(64);
        } else {
            let i = self.rng.below(proof.siblings.len() as u64) as usize;
            let bit = self.rng.below(256) as usize;
            proof.siblings[i].0 .0[bit / 8] ^= 1 << (bit % 8);
        }
    }
}
