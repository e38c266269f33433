//! Lossless fixed-latency delivery for node tests.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use pouw_core::consensus::RoundParams;
use pouw_core::model::{genesis_block, Block};
use pouw_core::worker::Deviation;
use pouw_core::{KeyPair, PublicKey};
use pouw_node::{Adversary, AuthorityConfig, Envelope, Node, NodeConfig, Outbound, Role, Topic};

pub const LATENCY_MS: u64 = 10;

pub const PARAMS: RoundParams = RoundParams {
    sub_problem_count: 4,
    event_count: 8,
    reference_count: 2,
    duration: 10,
};

pub fn ra_key() -> KeyPair {
    KeyPair::from_seed([1; 32])
}

pub fn genesis() -> Block {
    genesis_block(ra_key().public(), 0)
}

pub fn config() -> NodeConfig {
    NodeConfig::new(ra_key().public(), genesis())
}

enum Event {
    Deliver(usize, Envelope),
    Wake(usize),
}

pub struct Harness {
    pub nodes: Vec<Node>,
    pub online: Vec<bool>,
    pub now_ms: u64,
    index: BTreeMap<PublicKey, usize>,
    queue: BinaryHeap<Reverse<(u64, u64)>>,
    events: BTreeMap<u64, Event>,
    seq: u64,
}

impl Harness {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            online: Vec::new(),
            now_ms: 1_000,
            index: BTreeMap::new(),
            queue: BinaryHeap::new(),
            events: BTreeMap::new(),
            seq: 0,
        }
    }

    pub fn add(&mut self, node: Node) -> usize {
        let i = self.nodes.len();
        self.index.insert(node.public(), i);
        self.nodes.push(node);
        self.online.push(true);
        let out = self.nodes[i].start(self.now_ms);
        self.apply(i, out);
        i
    }

    pub fn authority(&mut self, rounds: u64) -> usize {
        let cfg = AuthorityConfig {
            params: PARAMS,
            max_rounds: rounds,
            issue_delay_ms: 1_000,
            rng_seed: 77,
        };
        let node = Node::new(ra_key(), Role::Authority(cfg), config(), 1).unwrap();
        self.add(node)
    }

    /// Add a miner and register it with the RA at index `ra`.
    pub fn miner(&mut self, ra: usize, seed: u8, deviation: Deviation) -> usize {
        let key = KeyPair::from_seed([seed; 32]);
        let address = key.public();
        let node = Node::new(key, Role::Miner(deviation), config(), u64::from(seed)).unwrap();
        let i = self.add(node);
        let (res, out) = self.nodes[ra].register_identity(&[seed], address);
        res.unwrap();
        self.apply(ra, out);
        i
    }

    pub fn full(&mut self, seed: u8, adversary: Adversary) -> usize {
        let mut cfg = config();
        cfg.adversary = adversary;
        let node = Node::new(KeyPair::from_seed([seed; 32]), Role::Full, cfg, u64::from(seed)).unwrap();
        self.add(node)
    }

    pub fn light(&mut self, seed: u8) -> usize {
        let node = Node::new(KeyPair::from_seed([seed; 32]), Role::Light, config(), u64::from(seed)).unwrap();
        self.add(node)
    }

    fn push(&mut self, at: u64, ev: Event) {
        self.seq += 1;
        self.queue.push(Reverse((at, self.seq)));
        self.events.insert(self.seq, ev);
    }

    pub fn apply(&mut self, from: usize, out: Vec<Outbound>) {
        let at = self.now_ms + LATENCY_MS;
        for o in out {
            match o {
                Outbound::Publish(env) => {
                    for to in 0..self.nodes.len() {
                        if to != from && self.subscribed(to, env.topic) {
                            self.push(at, Event::Deliver(to, env.clone()));
                        }
                    }
                }
                Outbound::Direct { to, envelope } => {
                    if let Some(&to) = self.index.get(&to) {
                        self.push(at, Event::Deliver(to, envelope));
                    }
                }
                Outbound::WakeAt(t) => self.push(t.max(self.now_ms), Event::Wake(from)),
            }
        }
    }

    fn subscribed(&self, to: usize, topic: Topic) -> bool {
        topic == Topic::Direct || self.nodes[to].subscriptions().contains(&topic)
    }

    /// Inject an envelope as if `to` received it now.
    pub fn deliver(&mut self, to: usize, env: &Envelope) {
        let out = self.nodes[to].handle_envelope(env, self.now_ms);
        self.apply(to, out);
    }

    pub fn run_until(&mut self, end_ms: u64) {
        while let Some(&Reverse((at, seq))) = self.queue.peek() {
            if at > end_ms {
                break;
            }
            self.queue.pop();
            self.now_ms = at;
            let ev = self.events.remove(&seq).expect("event");
            let (i, out) = match ev {
                Event::Deliver(to, _) if !self.online[to] => continue,
                Event::Deliver(to, env) => (to, self.nodes[to].handle_envelope(&env, at)),
                Event::Wake(i) if !self.online[i] => continue,
                Event::Wake(i) => (i, self.nodes[i].on_wake(at)),
            };
            self.apply(i, out);
        }
        self.now_ms = end_ms;
    }

    /// Bring an offline node back and restart its timers.
    pub fn rejoin(&mut self, i: usize) {
        self.online[i] = true;
        let out = self.nodes[i].start(self.now_ms);
        self.apply(i, out);
    }
}
