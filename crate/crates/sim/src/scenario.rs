//! Discrete-event run of a whole network: one RA, miners of every class,
//! replaying full nodes and light nodes on a lossy bus.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::path::Path;

use thiserror::Error;

use pouw_core::consensus::RoundParams;
use pouw_core::model::{cumulative_reward, genesis_block, TokenUnits, BASE_UNITS_PER_TOKEN};
use pouw_core::store::{append_block, state_at, ChainStore, StateStore, StoreError, StoreMode};
use pouw_core::worker::{sample_indices, Deviation};
use pouw_core::{KeyPair, PublicKey, Rng64};
use pouw_node::{Adversary, AuthorityConfig, Envelope, Node, NodeConfig, NodeError, Outbound, Role, Topic};

use crate::bus::Bus;
use crate::config::{ConfigError, ScenarioConfig};
use crate::report::{
    Class, ClassTally, Convergence, LightReport, NodeReport, RoundSummary, ScenarioReport, SybilOutcome,
};

/// Quiet time after the last round so stragglers can sync.
const SETTLE_MS: u64 = 20_000;
const ISSUE_DELAY_MS: u64 = 1_000;

// stream labels; one independent generator per purpose
const STREAM_KEYS: u64 = 1;
const STREAM_LATENCY: u64 = 2;
const STREAM_DROP: u64 = 3;
const STREAM_RA: u64 = 4;
const STREAM_TX: u64 = 5;
const STREAM_LIGHT: u64 = 6;
const STREAM_ADVERSARY: u64 = 7;
const STREAM_NODE_BASE: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Node(#[from] NodeError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug)]
pub struct Member {
    pub name: String,
    pub class: Class,
    pub node: Node,
}

#[derive(Debug)]
enum Event {
    Deliver(usize, Envelope),
    Wake(usize),
    Inject,
    LightQueries,
}

#[derive(Debug)]
pub struct Simulation {
    cfg: ScenarioConfig,
    members: Vec<Member>,
    index: BTreeMap<PublicKey, usize>,
    subscribers: BTreeMap<Topic, Vec<usize>>,
    bus: Bus,
    queue: BinaryHeap<Reverse<(u64, u64)>>,
    events: BTreeMap<u64, Event>,
    seq: u64,
    now_ms: u64,
    tx_rng: Rng64,
    light_rng: Rng64,
    sybil: SybilOutcome,
    round_ms: u64,
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        let seed = cfg.master_seed;
        let mut keys = Rng64::stream(seed, STREAM_KEYS);
        let mut adversary_rng = Rng64::stream(seed, STREAM_ADVERSARY);
        let ra_key = KeyPair::from_rng(&mut keys);
        let mut node_cfg = NodeConfig::new(ra_key.public(), genesis_block(ra_key.public(), 0));
        node_cfg.tx_cap = cfg.tx_cap;
        let round_ms = cfg.round_duration * 1000 + ISSUE_DELAY_MS;

        let authority = AuthorityConfig {
            params: RoundParams {
                sub_problem_count: cfg.sub_problem_count,
                event_count: cfg.event_count,
                reference_count: cfg.reference_count,
                duration: cfg.round_duration,
            },
            max_rounds: cfg.rounds,
            issue_delay_ms: ISSUE_DELAY_MS,
            rng_seed: Rng64::stream(seed, STREAM_RA).next_u64(),
        };
        let mut plan: Vec<(String, Class, Role, Adversary)> = Vec::new();
        let plain = Adversary::default();
        for i in 0..cfg.honest_miners {
            plan.push((format!("honest-{i}"), Class::Honest, Role::Miner(Deviation::Honest), plain));
        }
        for i in 0..cfg.corrupt_sub_miners {
            // two corrupted sub-problems (one if there is only one)
            let picks = sample_indices(cfg.sub_problem_count, 2.min(cfg.sub_problem_count), &mut adversary_rng);
            plan.push((format!("corrupt-{i}"), Class::CorruptSub, Role::Miner(Deviation::CorruptSub(picks)), plain));
        }
        for i in 0..cfg.wrong_seed_miners {
            let wrong = Deviation::WrongSeed(adversary_rng.next_u64());
            plan.push((format!("wrongseed-{i}"), Class::WrongSeed, Role::Miner(wrong), plain));
        }
        // sybils collude on one false digest
        let sybil_seed = adversary_rng.next_u64();
        for i in 0..cfg.sybil_attempts {
            plan.push((format!("sybil-{i}"), Class::Sybil, Role::Miner(Deviation::WrongSeed(sybil_seed)), plain));
        }
        let replaying = Adversary {
            replay_old_envelopes: true,
            tamper_responses: false,
        };
        for i in 0..cfg.replay_attackers {
            plan.push((format!("replay-{i}"), Class::Replay, Role::Full, replaying));
        }
        for i in 0..cfg.light_nodes {
            plan.push((format!("light-{i}"), Class::Light, Role::Light, plain));
        }

        let mut members = vec![Member {
            name: "ra".into(),
            class: Class::Authority,
            node: Node::new(ra_key, Role::Authority(authority), node_cfg.clone(), Rng64::stream(seed, STREAM_NODE_BASE).next_u64())?,
        }];
        for (i, (name, class, role, adversary)) in plan.into_iter().enumerate() {
            let mut c = node_cfg.clone();
            c.adversary = adversary;
            let node_seed = Rng64::stream(seed, STREAM_NODE_BASE + 1 + i as u64).next_u64();
            let node = Node::new(KeyPair::from_rng(&mut keys), role, c, node_seed)?;
            members.push(Member { name, class, node });
        }
        let index = members.iter().enumerate().map(|(i, m)| (m.node.public(), i)).collect();
        let mut subscribers: BTreeMap<Topic, Vec<usize>> = BTreeMap::new();
        for (i, m) in members.iter().enumerate() {
            for t in m.node.subscriptions() {
                subscribers.entry(t).or_default().push(i);
            }
        }
        Ok(Self {
            bus: Bus::new(
                cfg.latency,
                cfg.drop_rate,
                Rng64::stream(seed, STREAM_LATENCY),
                Rng64::stream(seed, STREAM_DROP),
            ),
            tx_rng: Rng64::stream(seed, STREAM_TX),
            light_rng: Rng64::stream(seed, STREAM_LIGHT),
            cfg,
            members,
            index,
            subscribers,
            queue: BinaryHeap::new(),
            events: BTreeMap::new(),
            seq: 0,
            now_ms: 0,
            sybil: SybilOutcome::default(),
            round_ms,
        })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn authority(&self) -> &Node {
        &self.members[0].node
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    fn push(&mut self, at: u64, ev: Event) {
        self.seq += 1;
        self.queue.push(Reverse((at, self.seq)));
        self.events.insert(self.seq, ev);
    }

    fn apply(&mut self, from: usize, out: Vec<Outbound>) {
        for o in out {
            match o {
                Outbound::Publish(env) => {
                    let to: Vec<usize> = self
                        .subscribers
                        .get(&env.topic)
                        .map(|s| s.iter().copied().filter(|&i| i != from).collect())
                        .unwrap_or_default();
                    self.send(env, to);
                }
                Outbound::Direct { to, envelope } => {
                    if let Some(&to) = self.index.get(&to) {
                        self.send(envelope, vec![to]);
                    }
                }
                Outbound::WakeAt(t) => self.push(t.max(self.now_ms), Event::Wake(from)),
            }
        }
    }

    fn send(&mut self, env: Envelope, to: Vec<usize>) {
        for s in self.bus.deliver(self.now_ms, env.topic.name(), env.wire_len(), to) {
            self.push(s.at_ms, Event::Deliver(s.to, env.clone()));
        }
    }

    fn register_miners(&mut self) {
        for i in 0..self.members.len() {
            let class = self.members[i].class;
            if !class.is_miner() {
                continue;
            }
            let identity = match class {
                Class::Sybil => b"identity:sybil".to_vec(),
                _ => format!("identity:{}", self.members[i].name).into_bytes(),
            };
            let address = self.members[i].node.public();
            let (res, out) = self.members[0].node.register_identity(&identity, address);
            if class == Class::Sybil {
                self.sybil.attempts += 1;
                match res {
                    Ok(()) => self.sybil.accepted += 1,
                    Err(_) => self.sybil.rejected += 1,
                }
            }
            self.apply(0, out);
        }
    }

    fn inject_transactions(&mut self) {
        let senders: Vec<usize> = (0..self.members.len()).filter(|&i| self.members[i].class == Class::Honest).collect();
        let receivers: Vec<PublicKey> = self.members.iter().skip(1).map(|m| m.node.public()).collect();
        if senders.is_empty() || receivers.is_empty() {
            return;
        }
        let sender = senders[self.tx_rng.below(senders.len() as u64) as usize];
        let receiver = receivers[self.tx_rng.below(receivers.len() as u64) as usize];
        let amount = TokenUnits(self.tx_rng.range_inclusive(1, 2 * BASE_UNITS_PER_TOKEN));
        let fee = TokenUnits(self.tx_rng.range_inclusive(1, 1_000));
        let out = self.members[sender].node.submit_transfer(receiver, amount, fee, self.now_ms);
        self.apply(sender, out);
    }

    /// Each light node asks a random honest miner for one balance proof and,
    /// when its tip block has transactions, one inclusion proof.
    fn light_queries(&mut self) {
        let servers: Vec<usize> = (0..self.members.len()).filter(|&i| self.members[i].class == Class::Honest).collect();
        let miners: Vec<PublicKey> = self.members.iter().filter(|m| m.class.is_miner()).map(|m| m.node.public()).collect();
        if servers.is_empty() || miners.is_empty() {
            return;
        }
        for light in 0..self.members.len() {
            if self.members[light].class != Class::Light {
                continue;
            }
            let server = self.members[servers[self.light_rng.below(servers.len() as u64) as usize]].node.public();
            let address = miners[self.light_rng.below(miners.len() as u64) as usize];
            let tip = self.members[light].node.tip_hash();
            let tx = self
                .authority()
                .chain()
                .full_block(&tip)
                .ok()
                .flatten()
                .filter(|b| !b.transactions.is_empty())
                .map(|b| b.transactions[self.light_rng.below(b.transactions.len() as u64) as usize].id());
            let node = &mut self.members[light].node;
            let mut out = node.request_balance(server, address, tip);
            if let Some(id) = tx {
                out.extend(node.request_tx_proof(server, id, tip));
            }
            self.apply(light, out);
        }
    }

    fn hard_limit_ms(&self) -> u64 {
        // every round may be retried once before the run is cut off
        2 * self.cfg.rounds * (self.round_ms + ISSUE_DELAY_MS) + 2 * SETTLE_MS
    }

    /// Run to completion: all rounds issued and closed, then a quiet period.
    pub fn run(&mut self) {
        self.register_miners();
        for i in 0..self.members.len() {
            let out = self.members[i].node.start(self.now_ms);
            self.apply(i, out);
        }
        if let Some(gap) = self.round_ms.checked_div(self.cfg.tx_injection_rate) {
            let gap = gap.max(1);
            self.push(self.round_ms.min(gap + ISSUE_DELAY_MS), Event::Inject);
        }
        if self.cfg.light_nodes > 0 {
            self.push(self.round_ms + ISSUE_DELAY_MS, Event::LightQueries);
        }
        let limit = self.hard_limit_ms();
        let mut finished_at: Option<u64> = None;
        while let Some(Reverse((at, seq))) = self.queue.pop() {
            if at > limit || finished_at.is_some_and(|f| at > f + SETTLE_MS) {
                self.now_ms = at.min(limit);
                break;
            }
            self.now_ms = at;
            let ev = self.events.remove(&seq).expect("event");
            let finished = finished_at.is_some();
            match ev {
                Event::Deliver(to, env) => {
                    let out = self.members[to].node.handle_envelope(&env, at);
                    self.apply(to, out);
                }
                Event::Wake(i) => {
                    let out = self.members[i].node.on_wake(at);
                    self.apply(i, out);
                }
                Event::Inject if !finished => {
                    self.inject_transactions();
                    let gap = (self.round_ms / self.cfg.tx_injection_rate).max(1);
                    self.push(at + gap, Event::Inject);
                }
                Event::LightQueries => {
                    self.light_queries();
                    self.push(at + self.round_ms, Event::LightQueries);
                }
                Event::Inject => {}
            }
            if finished_at.is_none() && self.authority().authority().is_some_and(|a| a.finished()) {
                finished_at = Some(at);
            }
        }
    }

    /// Copy the RA's chain into file stores under `dir` (chain.db, state.db).
    pub fn export_store(&self, dir: &Path) -> Result<(), ScenarioError> {
        std::fs::create_dir_all(dir).map_err(|e| StoreError::Io(e.to_string()))?;
        let mut chain = ChainStore::open_file(dir.join("chain.db"), StoreMode::Full)?;
        let mut state = StateStore::open_file(dir.join("state.db"))?;
        let src = self.authority().chain();
        for header in src.traverse()?.iter().rev() {
            let hash = header.hash();
            if chain.contains(&hash) {
                continue;
            }
            let block = src.full_block(&hash)?.ok_or(StoreError::UnknownBlock(hash))?;
            append_block(&mut chain, &mut state, &block)?;
            if let Some(seal) = src.seal(&hash)? {
                chain.put_seal(&hash, &seal)?;
            }
        }
        Ok(())
    }

    pub fn report(&self) -> ScenarioReport {
        let ra = self.authority();
        let ra_state = ra.authority().expect("member 0 is the RA");
        let ra_chain = ra.chain();
        let ra_hashes = ra_chain.hash_list().unwrap_or_default();
        let tip = ra.tip();
        let name_of = |a: &PublicKey| self.index.get(a).map(|&i| self.members[i].name.clone()).unwrap_or_else(|| a.short());
        let class_of = |a: &PublicKey| self.index.get(a).map(|&i| self.members[i].class);

        let nodes: Vec<NodeReport> = self
            .members
            .iter()
            .map(|m| NodeReport {
                name: m.name.clone(),
                class: m.class,
                address: m.node.public(),
                tip_block_id: m.node.tip().block_id,
                tip_hash: m.node.tip_hash(),
                state_root: m.node.world().map(|w| w.merkle_root()),
                metrics: m.node.metrics().clone(),
            })
            .collect();

        let mut winners: BTreeMap<String, u64> = self
            .members
            .iter()
            .filter(|m| m.class.is_miner())
            .map(|m| (m.name.clone(), 0))
            .collect();
        let mut eliminations: BTreeMap<Class, ClassTally> = BTreeMap::new();
        let mut rejections: BTreeMap<String, u64> = BTreeMap::new();
        let mut rounds = Vec::new();
        let mut rounds_without_block = Vec::new();
        for r in ra_state.records() {
            let mut tally = |list: &[PublicKey], f: fn(&mut ClassTally)| {
                for a in list {
                    if let Some(c) = class_of(a) {
                        f(eliminations.entry(c).or_default());
                    }
                }
            };
            tally(&r.stage1_eliminated, |t| t.stage1_eliminated += 1);
            tally(&r.outvoted, |t| t.outvoted += 1);
            tally(&r.uncommitted, |t| t.uncommitted += 1);
            tally(&r.eligible, |t| t.eligible += 1);
            if let Some(w) = &r.winner {
                tally(std::slice::from_ref(w), |t| t.wins += 1);
                *winners.entry(name_of(w)).or_default() += 1;
            } else {
                rounds_without_block.push(r.round);
            }
            for (reason, n) in &r.rejections {
                *rejections.entry(reason.clone()).or_default() += n;
            }
            // one per address and reason, not per message
            for addrs in r.rejected_addresses.values() {
                tally(addrs, |t| t.refusals += 1);
            }
            let removed = (r.stage1_eliminated.len() + r.outvoted.len() + r.uncommitted.len()) as u64;
            rounds.push(RoundSummary {
                round: r.round,
                block_id: r.block_id,
                winner: r.winner.as_ref().map(name_of),
                commitments: r.commitments,
                solutions: r.solutions,
                stage1_eliminated: r.stage1_eliminated.len() as u64,
                outvoted: r.outvoted.len() as u64,
                uncommitted: r.uncommitted.len() as u64,
                eligible: r.eligible.len() as u64,
                transactions: r.transactions,
                consistent: removed + r.eligible.len() as u64 == r.solutions,
            });
        }

        let mut seen = BTreeSet::new();
        let mut included = 0u64;
        let mut duplicates = 0u64;
        for h in &ra_hashes {
            if let Ok(Some(b)) = ra_chain.full_block(h) {
                for tx in &b.transactions {
                    included += 1;
                    if !seen.insert(tx.id()) {
                        duplicates += 1;
                    }
                }
            }
        }

        let light: Vec<LightReport> = self
            .members
            .iter()
            .filter(|m| m.class == Class::Light)
            .map(|m| {
                let hashes = m.node.chain().hash_list().unwrap_or_default();
                let log = m.node.light_log();
                let balances_match_chain = log.verified_balances.iter().all(|v| {
                    state_at(ra_chain, &v.block_hash).is_ok_and(|w| {
                        let wallet = w.wallet(&v.address);
                        wallet.balance.0 == v.balance && wallet.nonce == v.nonce
                    })
                });
                LightReport {
                    name: m.name.clone(),
                    tip_block_id: m.node.tip().block_id,
                    headers_consistent: ra_hashes.starts_with(&hashes),
                    tx_verified: log.verified_txs.len() as u64,
                    tx_rejected: log.tx_rejected,
                    balance_verified: log.verified_balances.len() as u64,
                    balance_rejected: log.balance_rejected,
                    balances_match_chain,
                }
            })
            .collect();

        let honest: Vec<&Member> = self
            .members
            .iter()
            .filter(|m| matches!(m.class, Class::Authority | Class::Honest))
            .collect();
        let minted = ra.world().map(|w| w.minted().0).unwrap_or(0);
        let expected = cumulative_reward(tip.block_id).0;
        let convergence = Convergence {
            honest_same_tip: honest.iter().all(|m| m.node.tip_hash() == tip.hash()),
            honest_same_state: honest.iter().all(|m| m.node.world() == ra.world()),
            light_headers_consistent: light.iter().all(|l| l.headers_consistent),
            light_at_tip: light.iter().all(|l| l.tip_block_id == tip.block_id),
            rounds_consistent: rounds.iter().all(|r| r.consistent),
            supply_matches_schedule: minted == expected,
        };

        ScenarioReport {
            config: self.cfg.clone(),
            virtual_end_ms: self.now_ms,
            blocks: tip.block_id,
            authority_tip: tip.hash(),
            minted_base_units: minted,
            expected_minted_base_units: expected,
            minted_tokens: TokenUnits(minted).as_tokens_f64(),
            nodes,
            winners,
            rounds,
            rounds_without_block,
            eliminations,
            rejections,
            messages: self.bus.stats().iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            bytes_transferred: self.bus.bytes_transferred(),
            sybil: self.sybil,
            transactions_included: included,
            replayed_transactions_included: duplicates,
            replays_sent: self.members.iter().map(|m| m.node.metrics().replays_sent).sum(),
            light,
            convergence,
        }
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    let mut sim = Simulation::new(cfg.clone())?;
    sim.run();
    Ok(sim.report())
}
